//! Run configuration: defaults, `key=value` config files, and flag overrides.

use crate::ranking::RefineVariant;
use crate::report::ReportFormat;
use crate::spectra::Technique;
use std::path::PathBuf;

/// All tunables of a run. Flags override config-file values, which override
/// the defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// None means "all six techniques" (the evaluate default).
    pub technique: Option<Technique>,
    pub purify: bool,
    pub refine_variant: RefineVariant,
    /// Mutant step budgets are this multiple of the original test's steps.
    pub budget_mult: usize,
    pub sample: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub format: ReportFormat,
    /// Base step budget for ordinary suite runs.
    pub budget: usize,
    pub cap_per_operator: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            technique: None,
            purify: false,
            refine_variant: RefineVariant::Product,
            budget_mult: 5,
            sample: 100,
            seed: 42,
            output: PathBuf::from("out"),
            format: ReportFormat::Json,
            budget: crate::pipeline::DEFAULT_STEP_BUDGET,
            cap_per_operator: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |what: &str| ConfigError(format!("invalid {what}: `{value}`"));
        match key {
            "technique" => {
                self.technique = if value == "all" {
                    None
                } else {
                    Some(Technique::from_name(value).ok_or_else(|| bad("technique"))?)
                };
            }
            "purify" => {
                self.purify = value.parse().map_err(|_| bad("purify (expected true/false)"))?;
            }
            "refine_variant" => {
                self.refine_variant =
                    RefineVariant::from_name(value).ok_or_else(|| bad("refine_variant"))?;
            }
            "budget_mult" => {
                self.budget_mult = value.parse().map_err(|_| bad("budget_mult"))?;
                if self.budget_mult < 1 {
                    return Err(ConfigError("budget_mult must be >= 1".into()));
                }
            }
            "sample" => {
                self.sample = value.parse().map_err(|_| bad("sample"))?;
                if self.sample < 1 {
                    return Err(ConfigError("sample must be >= 1".into()));
                }
            }
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "output" => self.output = PathBuf::from(value),
            "format" => {
                self.format = ReportFormat::from_name(value).ok_or_else(|| bad("format"))?;
            }
            "budget" => {
                self.budget = value.parse().map_err(|_| bad("budget"))?;
            }
            "cap_per_operator" => {
                self.cap_per_operator = Some(value.parse().map_err(|_| bad("cap_per_operator"))?);
            }
            other => return Err(ConfigError(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses a config file: one `key = value` per line, `#` comments,
    /// blank lines ignored.
    pub fn apply_file(&mut self, contents: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in contents.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(key.trim(), value.trim().trim_matches('"'))
                .map_err(|e| ConfigError(format!("line {}: {}", lineno + 1, e.0)))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.budget_mult, 5);
        assert_eq!(c.refine_variant, RefineVariant::Product);
        assert!(c.technique.is_none());
    }

    #[test]
    fn file_parsing_and_overrides() {
        let mut c = RunConfig::default();
        c.apply_file(
            "# settings\n\
             technique = ochiai\n\
             purify = true\n\
             seed = 7   # fixed\n\
             refine_variant = geometric\n\
             format = csv\n",
        )
        .unwrap();
        assert_eq!(c.technique, Some(Technique::Ochiai));
        assert!(c.purify);
        assert_eq!(c.seed, 7);
        assert_eq!(c.refine_variant, RefineVariant::Geometric);
        assert_eq!(c.format, ReportFormat::Csv);
        // a later flag-style set overrides the file value.
        c.set("technique", "all").unwrap();
        assert!(c.technique.is_none());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut c = RunConfig::default();
        assert!(c.set("technique", "psychic").is_err());
        assert!(c.set("sample", "0").is_err());
        assert!(c.set("budget_mult", "0").is_err());
        assert!(c.set("nonsense", "1").is_err());
        assert!(c.apply_file("just words\n").is_err());
    }
}
