//! Command-line entry point.
//!
//! Commands: `run` (execute a suite), `localize` (rank statements, optionally
//! with purification), `mutate` (generate and classify mutants), `evaluate`
//! (mutation-based comparison of base vs. purified localization).
//!
//! Exit codes: 0 success, 2 usage/config error, 3 parse error, 4 suite-state
//! error (nothing to localize / corpus not green), 5 internal error.

use clap::{Args, Parser, Subcommand};
use minifl::config::RunConfig;
use minifl::frontend::{self, parse, StatementId};
use minifl::interpreter::run_suite;
use minifl::mutation;
use minifl::pipeline::{self, EvalSettings, PipelineError};
use minifl::ranking::stmt_effort;
use minifl::report;
use minifl::spectra::Technique;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_SUITE: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Parser)]
#[command(name = "minifl", about = "Spectrum-based fault localization for MiniLang", version)]
struct Cli {
    /// Config file with key=value lines; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct CommonFlags {
    #[arg(long)]
    technique: Option<String>,
    /// Enable test-case purification.
    #[arg(long)]
    purify: bool,
    /// Disable test-case purification (overrides config).
    #[arg(long, conflicts_with = "purify")]
    no_purify: bool,
    #[arg(long)]
    refine_variant: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    budget_mult: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    format: Option<String>,
    /// Output directory for artifacts.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    cap_per_operator: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a program's test suite and print each outcome.
    Run {
        program: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Rank program statements by suspiciousness.
    Localize {
        program: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Generate mutants and report which ones the suite detects.
    Mutate {
        program: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Mutation-based evaluation of purification across a corpus.
    Evaluate {
        programs: Vec<PathBuf>,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

fn usage_err(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn internal_err(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_INTERNAL
}

fn build_config(config_path: &Option<PathBuf>, flags: &CommonFlags) -> Result<RunConfig, u8> {
    let mut cfg = RunConfig::default();
    if let Some(path) = config_path {
        let contents = std::fs::read_to_string(path)
            .map_err(|e| usage_err(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_file(&contents).map_err(|e| usage_err(e))?;
    }
    if let Some(t) = &flags.technique {
        cfg.set("technique", t).map_err(|e| usage_err(e))?;
    }
    if flags.purify {
        cfg.purify = true;
    }
    if flags.no_purify {
        cfg.purify = false;
    }
    if let Some(v) = &flags.refine_variant {
        cfg.set("refine_variant", v).map_err(|e| usage_err(e))?;
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(n) = flags.sample {
        cfg.set("sample", &n.to_string()).map_err(|e| usage_err(e))?;
    }
    if let Some(m) = flags.budget_mult {
        cfg.set("budget_mult", &m.to_string()).map_err(|e| usage_err(e))?;
    }
    if let Some(b) = flags.budget {
        cfg.budget = b;
    }
    if let Some(f) = &flags.format {
        cfg.set("format", f).map_err(|e| usage_err(e))?;
    }
    if let Some(o) = &flags.out {
        cfg.output = o.clone();
    }
    if let Some(c) = flags.cap_per_operator {
        cfg.cap_per_operator = Some(c);
    }
    Ok(cfg)
}

fn load_program(path: &Path) -> Result<frontend::Ast, u8> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| usage_err(format!("cannot read {}: {e}", path.display())))?;
    parse(&source, &path.display().to_string()).map_err(|e| {
        eprintln!("{e}");
        EXIT_PARSE
    })
}

fn pipeline_exit(e: PipelineError) -> u8 {
    eprintln!("error: {e}");
    match e {
        PipelineError::GreenSuite | PipelineError::SuiteNotGreen(_) => EXIT_SUITE,
        PipelineError::Internal(_) => EXIT_INTERNAL,
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), u8> {
    std::fs::create_dir_all(dir)
        .map_err(|e| internal_err(format!("cannot create {}: {e}", dir.display())))
}

fn run(cli: Cli) -> Result<(), u8> {
    match cli.cmd {
        Cmd::Run { program, flags } => {
            let cfg = build_config(&cli.config, &flags)?;
            let ast = load_program(&program)?;
            let results = run_suite(&ast, cfg.budget);
            let mut failing = 0;
            for (name, (outcome, trace)) in &results {
                let status = match outcome.broken() {
                    Some(b) => format!("{} at {} (line {})", outcome.kind_str(), b, ast.line_of(b)),
                    None => outcome.kind_str().to_string(),
                };
                println!("{name}: {status} [{} steps]", trace.step_count);
                if !outcome.is_pass() {
                    failing += 1;
                }
            }
            println!("{} tests, {} failing", results.len(), failing);
            Ok(())
        }
        Cmd::Localize { program, flags } => {
            let cfg = build_config(&cli.config, &flags)?;
            let ast = load_program(&program)?;
            let technique = cfg.technique.unwrap_or(Technique::Tarantula);
            let loc = pipeline::localize_program(
                &ast,
                technique,
                cfg.purify,
                cfg.refine_variant,
                cfg.budget,
            )
            .map_err(pipeline_exit)?;
            ensure_out_dir(&cfg.output)?;

            // ranking rows always carry the full column set; without
            // purification the ratio is 0 and the score mirrors norm.
            let refined = match &loc.refined {
                Some(r) => r.clone(),
                None => minifl::ranking::refine(
                    &loc.susp,
                    &minifl::purification::PurifiedSpectra::empty(loc.matrix.statements.clone()),
                    cfg.refine_variant,
                ),
            };
            let operative = loc.operative_scores();
            let efforts: BTreeMap<StatementId, f64> = operative
                .keys()
                .map(|&s| (s, stmt_effort(&operative, s).unwrap()))
                .collect();
            let csv = report::ranking_csv(&ast, &refined, &efforts, |s| operative[&s]);
            write_artifact(&cfg.output.join("ranking.csv"), &csv)?;
            write_artifact(&cfg.output.join("spectra.csv"), &loc.matrix.to_csv())?;
            write_artifact(&cfg.output.join("timings.txt"), &loc.timings.render())?;
            if let Some(p) = &loc.purified {
                let dir = cfg.output.join("purified");
                ensure_out_dir(&dir)?;
                for t in &p.tests {
                    let name = format!("{}.ml0", t.body.name);
                    write_artifact(&dir.join(name), &frontend::print_test(&t.body))?;
                }
                println!(
                    "purification: {} purified tests, {} spectra rows, {} fallbacks",
                    p.tests.len(),
                    p.spectra.rows.len(),
                    p.fallbacks
                );
            }
            let mut ranked: Vec<_> = operative.iter().collect();
            ranked.sort_by(|a, b| b.1.partial_cmp(a.1).unwrap().then(a.0.cmp(b.0)));
            println!("technique: {technique}, purify: {}", cfg.purify);
            for (s, v) in ranked.iter().take(10) {
                println!("  {} (line {}): {}", s, ast.line_of(**s), report::fmt4(**v));
            }
            println!("artifacts written to {}", cfg.output.display());
            Ok(())
        }
        Cmd::Mutate { program, flags } => {
            let cfg = build_config(&cli.config, &flags)?;
            let ast = load_program(&program)?;
            let budgets =
                mutation::detection_budgets(&ast, cfg.budget, cfg.budget_mult).map_err(|e| {
                    eprintln!("error: {e}");
                    EXIT_SUITE
                })?;
            let mutants = mutation::generate(&ast, cfg.seed, cfg.cap_per_operator);
            ensure_out_dir(&cfg.output)?;
            let mut manifest = String::new();
            let mut detected = 0;
            for m in &mutants {
                let d = mutation::is_detected(m, &budgets);
                if d {
                    detected += 1;
                }
                manifest.push_str(&report::manifest_line(&ast, m, d));
                manifest.push('\n');
            }
            write_artifact(&cfg.output.join("mutants.jsonl"), &manifest)?;
            println!("{} mutants, {} detected", mutants.len(), detected);
            println!("manifest written to {}", cfg.output.join("mutants.jsonl").display());
            Ok(())
        }
        Cmd::Evaluate { programs, flags } => {
            if programs.is_empty() {
                return Err(usage_err("evaluate needs at least one program"));
            }
            let mut cfg = build_config(&cli.config, &flags)?;
            // evaluation compares base vs. purified rankings, so purification
            // defaults on unless explicitly disabled.
            if !flags.purify && !flags.no_purify {
                cfg.purify = true;
            }
            let mut corpus = Vec::new();
            for path in &programs {
                let ast = load_program(path)?;
                let name = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                corpus.push((name, ast));
            }
            corpus.sort_by(|a, b| a.0.cmp(&b.0));
            let settings = EvalSettings {
                techniques: match cfg.technique {
                    Some(t) => vec![t],
                    None => Technique::ALL.to_vec(),
                },
                purify: cfg.purify,
                variant: cfg.refine_variant,
                budget_mult: cfg.budget_mult,
                sample: cfg.sample,
                seed: cfg.seed,
                cap_per_operator: cfg.cap_per_operator,
            };
            let (rep, timings) =
                pipeline::evaluate_corpus(&corpus, &settings).map_err(pipeline_exit)?;
            ensure_out_dir(&cfg.output)?;
            let path = cfg.output.join(format!("report.{}", cfg.format.extension()));
            report::write_report(&rep, cfg.format, &path)
                .map_err(|e| internal_err(format!("cannot write report: {e}")))?;
            write_artifact(&cfg.output.join("timings.txt"), &timings.render())?;
            print!("{}", report::report_text(&rep));
            println!("report written to {}", path.display());
            Ok(())
        }
    }
}

fn write_artifact(path: &Path, contents: &str) -> Result<(), u8> {
    std::fs::write(path, contents)
        .map_err(|e| internal_err(format!("cannot write {}: {e}", path.display())))
}
