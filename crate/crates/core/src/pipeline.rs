//! End-to-end orchestration shared by the CLI and the integration tests:
//! suite execution -> spectrum -> base metric -> (optional) purification and
//! refinement, plus the mutation-based evaluation loop.

use crate::frontend::Ast;
use crate::interpreter::run_suite;
use crate::mutation::{self, Mutant, MutationError};
use crate::purification::{purify, PurifyResult};
use crate::ranking::{self, RefineVariant, RefinedScores};
use crate::report::{build_report, EvaluationReport, MutantRow};
use crate::spectra::{self, SpectraError, SpectrumMatrix, SuspiciousnessMap, Technique};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Base step budget for ordinary suite runs.
pub const DEFAULT_STEP_BUDGET: usize = 1_000_000;

/// Wall-clock phase breakdown of one run.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub atomize_nanos: u128,
    pub slice_nanos: u128,
    pub refine_nanos: u128,
}

impl PhaseTimings {
    pub fn add(&mut self, other: PhaseTimings) {
        self.atomize_nanos += other.atomize_nanos;
        self.slice_nanos += other.slice_nanos;
        self.refine_nanos += other.refine_nanos;
    }

    /// Sidecar rendering, one phase per line.
    pub fn render(&self) -> String {
        format!(
            "atomization_nanos={}\nslicing_nanos={}\nrefinement_nanos={}\n",
            self.atomize_nanos, self.slice_nanos, self.refine_nanos
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("nothing to localize: the test suite has no failing test")]
    GreenSuite,
    #[error("test suite is not green: {0}")]
    SuiteNotGreen(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<SpectraError> for PipelineError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::NoFailingTest | SpectraError::EmptySuite => PipelineError::GreenSuite,
            other => PipelineError::Internal(other.to_string()),
        }
    }
}

impl From<MutationError> for PipelineError {
    fn from(e: MutationError) -> Self {
        match e {
            MutationError::SuiteNotGreen(name) => PipelineError::SuiteNotGreen(name),
            other => PipelineError::Internal(other.to_string()),
        }
    }
}

/// Everything a localization run produces.
#[derive(Debug)]
pub struct Localization {
    pub technique: Technique,
    pub purify: bool,
    pub matrix: SpectrumMatrix,
    pub susp: SuspiciousnessMap,
    pub purified: Option<PurifyResult>,
    pub refined: Option<RefinedScores>,
    pub timings: PhaseTimings,
}

impl Localization {
    /// The map that drives the final ranking: refined scores when
    /// purification ran, base suspiciousness otherwise.
    pub fn operative_scores(&self) -> BTreeMap<crate::frontend::StatementId, f64> {
        match &self.refined {
            Some(r) => r.iter().map(|(&s, v)| (s, v.score)).collect(),
            None => self.susp.clone(),
        }
    }
}

/// Runs the suite and localizes. With `with_purification`, the failing tests
/// are atomized, sliced, and their deduplicated spectra refine the ranking.
pub fn localize_program(
    program: &Ast,
    technique: Technique,
    with_purification: bool,
    variant: RefineVariant,
    step_budget: usize,
) -> Result<Localization, PipelineError> {
    let results = run_suite(program, step_budget);
    let matrix = spectra::build_matrix(program, &results)?;
    let susp = spectra::localize(&matrix, technique)?;
    let mut timings = PhaseTimings::default();

    let (purified, refined) = if with_purification {
        let failing: Vec<String> = matrix
            .rows
            .iter()
            .filter(|r| r.failed)
            .map(|r| r.test.clone())
            .collect();
        let result = purify(program, &failing, |_| step_budget);
        timings.atomize_nanos = result.atomize_nanos;
        timings.slice_nanos = result.slice_nanos;
        let refine_start = std::time::Instant::now();
        let refined = ranking::refine(&susp, &result.spectra, variant);
        timings.refine_nanos = refine_start.elapsed().as_nanos();
        (Some(result), Some(refined))
    } else {
        (None, None)
    };

    Ok(Localization { technique, purify: with_purification, matrix, susp, purified, refined, timings })
}

/// Evaluation settings (a subset of the CLI config, decoupled from I/O).
#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub techniques: Vec<Technique>,
    pub purify: bool,
    pub variant: RefineVariant,
    pub budget_mult: usize,
    pub sample: usize,
    pub seed: u64,
    pub cap_per_operator: Option<usize>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            techniques: Technique::ALL.to_vec(),
            purify: true,
            variant: RefineVariant::Product,
            budget_mult: 5,
            sample: 100,
            seed: 42,
            cap_per_operator: None,
        }
    }
}

struct PoolEntry {
    program_name: String,
    mutant: Mutant,
    budgets: BTreeMap<String, usize>,
}

/// Evaluates one detected mutant: efforts for each technique with and
/// without purification, against the mutant's own faulty statement.
fn evaluate_mutant(
    entry: &PoolEntry,
    settings: &EvalSettings,
    timings: &mut PhaseTimings,
) -> Result<Vec<MutantRow>, PipelineError> {
    let program = &entry.mutant.program;
    let budget_of = |name: &str| entry.budgets.get(name).copied().unwrap_or(1000);
    let results: BTreeMap<_, _> = program
        .tests
        .iter()
        .map(|t| {
            let r = crate::interpreter::run_test_def(program, t, budget_of(&t.name));
            (t.name.clone(), r)
        })
        .collect();
    let matrix = spectra::build_matrix(program, &results)?;

    let purified = if settings.purify {
        let failing: Vec<String> = matrix
            .rows
            .iter()
            .filter(|r| r.failed)
            .map(|r| r.test.clone())
            .collect();
        let result = purify(program, &failing, |name| budget_of(name));
        timings.atomize_nanos += result.atomize_nanos;
        timings.slice_nanos += result.slice_nanos;
        Some(result)
    } else {
        None
    };

    let faulty = entry.mutant.stmt;
    let mut rows = Vec::new();
    for &technique in &settings.techniques {
        let susp = spectra::localize(&matrix, technique)?;
        let effort_original = ranking::stmt_effort(&susp, faulty).ok_or_else(|| {
            PipelineError::Internal(format!(
                "faulty statement {faulty} of {} is not in the candidate set",
                entry.mutant.id
            ))
        })?;
        let effort_purified = match &purified {
            Some(p) => {
                let refine_start = std::time::Instant::now();
                let refined = ranking::refine(&susp, &p.spectra, settings.variant);
                timings.refine_nanos += refine_start.elapsed().as_nanos();
                let scores: BTreeMap<_, _> =
                    refined.iter().map(|(&s, v)| (s, v.score)).collect();
                ranking::stmt_effort(&scores, faulty).unwrap()
            }
            None => effort_original,
        };
        let (outcome, stmt_save) = ranking::compare(effort_original, effort_purified);
        rows.push(MutantRow {
            program: entry.program_name.clone(),
            mutant: entry.mutant.id.clone(),
            operator: entry.mutant.operator.name(),
            stmt_ordinal: faulty.0,
            line: program.line_of(faulty),
            technique,
            effort_original,
            effort_purified,
            outcome,
            stmt_save,
        });
    }
    Ok(rows)
}

/// Full evaluation over a corpus: generate -> filter detected -> sample ->
/// per-mutant efforts -> aggregate report. Deterministic given the seed.
pub fn evaluate_corpus(
    programs: &[(String, Ast)],
    settings: &EvalSettings,
) -> Result<(EvaluationReport, PhaseTimings), PipelineError> {
    let mut pool: Vec<PoolEntry> = Vec::new();
    for (name, ast) in programs {
        let budgets =
            mutation::detection_budgets(ast, DEFAULT_STEP_BUDGET, settings.budget_mult)
                .map_err(|e| match e {
                    MutationError::SuiteNotGreen(t) => {
                        PipelineError::SuiteNotGreen(format!("{name}: test `{t}`"))
                    }
                    other => PipelineError::Internal(other.to_string()),
                })?;
        let mutants = mutation::generate(ast, settings.seed, settings.cap_per_operator);
        for mutant in mutants {
            if mutation::is_detected(&mutant, &budgets) {
                pool.push(PoolEntry {
                    program_name: name.clone(),
                    mutant,
                    budgets: budgets.clone(),
                });
            }
        }
    }

    // Seeded sample without replacement, preserving deterministic pool order.
    let selected: Vec<&PoolEntry> = if settings.sample < pool.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let mut idx: Vec<usize> =
            rand::seq::index::sample(&mut rng, pool.len(), settings.sample).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| &pool[i]).collect()
    } else {
        pool.iter().collect()
    };

    let mut timings = PhaseTimings::default();
    let mut rows = Vec::new();
    for entry in selected {
        rows.extend(evaluate_mutant(entry, settings, &mut timings)?);
    }
    let sample = rows.len() / settings.techniques.len().max(1);
    Ok((build_report(rows, settings.seed, sample, settings.purify), timings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    const SRC: &str = "fn f(a) {\n\
                           if (a < 0) {\n\
                               return 0 - a;\n\
                           }\n\
                           return a;\n\
                       }\n\
                       test t_pos { assert_eq(f(3), 3); }\n\
                       test t_neg { assert_eq(f(-3), 3); }";

    #[test]
    fn green_suite_is_rejected() {
        let ast = parse(SRC, "p.ml0").unwrap();
        let err = localize_program(
            &ast,
            Technique::Ochiai,
            false,
            RefineVariant::Product,
            DEFAULT_STEP_BUDGET,
        )
        .unwrap_err();
        assert!(matches!(err, PipelineError::GreenSuite));
    }

    #[test]
    fn purify_false_builds_no_purification_artifacts() {
        // introduce a fault so there is something to localize.
        let faulty = SRC.replace("a < 0", "a > 0");
        let ast = parse(&faulty, "p.ml0").unwrap();
        let loc = localize_program(
            &ast,
            Technique::Tarantula,
            false,
            RefineVariant::Product,
            DEFAULT_STEP_BUDGET,
        )
        .unwrap();
        assert!(loc.purified.is_none());
        assert!(loc.refined.is_none());
        assert_eq!(loc.timings.atomize_nanos, 0);
        assert_eq!(loc.timings.slice_nanos, 0);
        assert_eq!(loc.timings.refine_nanos, 0);
        assert_eq!(loc.operative_scores(), loc.susp);
    }

    #[test]
    fn purify_true_records_phase_timings() {
        let faulty = SRC.replace("a < 0", "a > 0");
        let ast = parse(&faulty, "p.ml0").unwrap();
        let loc = localize_program(
            &ast,
            Technique::Tarantula,
            true,
            RefineVariant::Product,
            DEFAULT_STEP_BUDGET,
        )
        .unwrap();
        assert!(loc.purified.is_some());
        assert!(loc.refined.is_some());
        assert!(loc.timings.atomize_nanos > 0);
    }

    #[test]
    fn self_comparison_without_purification_is_all_neutral() {
        let ast = parse(SRC, "p.ml0").unwrap();
        let settings = EvalSettings { purify: false, sample: 10_000, ..Default::default() };
        let (report, timings) = evaluate_corpus(&[("p.ml0".into(), ast)], &settings).unwrap();
        assert!(report.total_mutants > 0);
        assert!(report.rows.iter().all(|r| r.outcome.name() == "neutral"));
        assert_eq!(timings.atomize_nanos, 0);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let ast = parse(SRC, "p.ml0").unwrap();
        let settings = EvalSettings { sample: 5, ..Default::default() };
        let programs = vec![("p.ml0".to_string(), ast)];
        let (r1, _) = evaluate_corpus(&programs, &settings).unwrap();
        let (r2, _) = evaluate_corpus(&programs, &settings).unwrap();
        assert_eq!(crate::report::report_json(&r1), crate::report::report_json(&r2));
    }
}
