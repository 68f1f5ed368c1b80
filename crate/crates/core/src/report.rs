//! Deterministic report artifacts: evaluation reports (JSON / CSV / text),
//! ranking CSV export, and the mutant manifest. All writers are hand-rolled
//! so identical inputs produce byte-identical output: keys appear in a fixed
//! order and every number is printed with four decimal places.

use crate::frontend::{Ast, StatementId};
use crate::mutation::Mutant;
use crate::ranking::{ComparisonOutcome, RefinedScores};
use crate::spectra::Technique;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl ReportFormat {
    pub fn from_name(name: &str) -> Option<ReportFormat> {
        match name {
            "json" => Some(ReportFormat::Json),
            "csv" => Some(ReportFormat::Csv),
            "text" => Some(ReportFormat::Text),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Text => "txt",
        }
    }
}

/// One evaluated (mutant, technique) pair.
#[derive(Debug, Clone)]
pub struct MutantRow {
    pub program: String,
    pub mutant: String,
    pub operator: &'static str,
    pub stmt_ordinal: u32,
    pub line: u32,
    pub technique: Technique,
    pub effort_original: f64,
    pub effort_purified: f64,
    pub outcome: ComparisonOutcome,
    pub stmt_save: f64,
}

/// Per-category slice of the aggregate (by effort on the base technique:
/// exactly 1, in (1, 10], or above 10).
#[derive(Debug, Clone, Copy, Default)]
pub struct CategoryAggregate {
    pub count: usize,
    pub mean_save: f64,
    pub negatives: usize,
}

#[derive(Debug, Clone)]
pub struct TechniqueAggregate {
    pub technique: Technique,
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
    pub pct_positive: f64,
    pub pct_negative: f64,
    pub pct_neutral: f64,
    pub mean_effort_original: f64,
    pub mean_effort_purified: f64,
    pub cat_optimal: CategoryAggregate,
    pub cat_mid: CategoryAggregate,
    pub cat_high: CategoryAggregate,
    /// Among rows with original effort exactly 1, the percentage that did
    /// not regress.
    pub optimal_preserved_pct: f64,
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub seed: u64,
    pub sample: usize,
    pub purify: bool,
    /// Number of distinct mutants evaluated.
    pub total_mutants: usize,
    pub rows: Vec<MutantRow>,
    pub aggregates: Vec<TechniqueAggregate>,
}

/// Fixed-width number formatting shared by every writer.
pub fn fmt4(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.4}")
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn category_of(effort_original: f64) -> usize {
    if effort_original <= 1.0 {
        0
    } else if effort_original <= 10.0 {
        1
    } else {
        2
    }
}

fn aggregate_for(technique: Technique, rows: &[MutantRow]) -> TechniqueAggregate {
    let mine: Vec<&MutantRow> = rows.iter().filter(|r| r.technique == technique).collect();
    let total = mine.len();
    let count_outcome = |o: ComparisonOutcome| mine.iter().filter(|r| r.outcome == o).count();
    let positive = count_outcome(ComparisonOutcome::Positive);
    let negative = count_outcome(ComparisonOutcome::Negative);
    let neutral = count_outcome(ComparisonOutcome::Neutral);
    let pct = |c: usize| if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 };

    let mut cats = [CategoryAggregate::default(); 3];
    for i in 0..3 {
        let slice: Vec<&&MutantRow> =
            mine.iter().filter(|r| category_of(r.effort_original) == i).collect();
        cats[i] = CategoryAggregate {
            count: slice.len(),
            mean_save: mean(slice.iter().map(|r| r.stmt_save)),
            negatives: slice
                .iter()
                .filter(|r| r.outcome == ComparisonOutcome::Negative)
                .count(),
        };
    }
    let optimal_preserved_pct = if cats[0].count == 0 {
        100.0
    } else {
        100.0 * (cats[0].count - cats[0].negatives) as f64 / cats[0].count as f64
    };

    TechniqueAggregate {
        technique,
        positive,
        negative,
        neutral,
        pct_positive: pct(positive),
        pct_negative: pct(negative),
        pct_neutral: pct(neutral),
        mean_effort_original: mean(mine.iter().map(|r| r.effort_original)),
        mean_effort_purified: mean(mine.iter().map(|r| r.effort_purified)),
        cat_optimal: cats[0],
        cat_mid: cats[1],
        cat_high: cats[2],
        optimal_preserved_pct,
    }
}

/// Assembles the report from per-row results. Rows are sorted by
/// (program, mutant, technique) for determinism.
pub fn build_report(
    mut rows: Vec<MutantRow>,
    seed: u64,
    sample: usize,
    purify: bool,
) -> EvaluationReport {
    rows.sort_by(|a, b| {
        (&a.program, &a.mutant, a.technique).cmp(&(&b.program, &b.mutant, b.technique))
    });
    let mut distinct: Vec<(&String, &String)> =
        rows.iter().map(|r| (&r.program, &r.mutant)).collect();
    distinct.dedup();
    let total_mutants = distinct.len();
    let techniques: Vec<Technique> = Technique::ALL
        .into_iter()
        .filter(|t| rows.iter().any(|r| r.technique == *t))
        .collect();
    let aggregates = techniques.iter().map(|&t| aggregate_for(t, &rows)).collect();
    EvaluationReport { seed, sample, purify, total_mutants, rows, aggregates }
}

fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn category_json(c: &CategoryAggregate) -> String {
    format!(
        "{{\"count\":{},\"mean_save\":{},\"negatives\":{}}}",
        c.count,
        fmt4(c.mean_save),
        c.negatives
    )
}

pub fn report_json(report: &EvaluationReport) -> String {
    let mut out = String::from("{\n");
    out.push_str("  \"aggregates\": [\n");
    for (i, a) in report.aggregates.iter().enumerate() {
        let _ = write!(
            out,
            "    {{\"technique\":{},\"positive\":{},\"negative\":{},\"neutral\":{},\
             \"pct_positive\":{},\"pct_negative\":{},\"pct_neutral\":{},\
             \"mean_effort_original\":{},\"mean_effort_purified\":{},\
             \"category_optimal\":{},\"category_mid\":{},\"category_high\":{},\
             \"optimal_preserved_pct\":{}}}",
            json_str(a.technique.name()),
            a.positive,
            a.negative,
            a.neutral,
            fmt4(a.pct_positive),
            fmt4(a.pct_negative),
            fmt4(a.pct_neutral),
            fmt4(a.mean_effort_original),
            fmt4(a.mean_effort_purified),
            category_json(&a.cat_optimal),
            category_json(&a.cat_mid),
            category_json(&a.cat_high),
            fmt4(a.optimal_preserved_pct),
        );
        out.push_str(if i + 1 < report.aggregates.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n");
    let _ = writeln!(out, "  \"purify\": {},", report.purify);
    out.push_str("  \"rows\": [\n");
    for (i, r) in report.rows.iter().enumerate() {
        let _ = write!(
            out,
            "    {{\"program\":{},\"mutant\":{},\"operator\":{},\"stmt_ordinal\":{},\
             \"line\":{},\"technique\":{},\"effort_original\":{},\"effort_purified\":{},\
             \"outcome\":{},\"stmt_save\":{}}}",
            json_str(&r.program),
            json_str(&r.mutant),
            json_str(r.operator),
            r.stmt_ordinal,
            r.line,
            json_str(r.technique.name()),
            fmt4(r.effort_original),
            fmt4(r.effort_purified),
            json_str(r.outcome.name()),
            fmt4(r.stmt_save),
        );
        out.push_str(if i + 1 < report.rows.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n");
    let _ = writeln!(out, "  \"sample\": {},", report.sample);
    let _ = writeln!(out, "  \"seed\": {},", report.seed);
    let _ = writeln!(out, "  \"total_mutants\": {}", report.total_mutants);
    out.push_str("}\n");
    out
}

pub fn report_csv(report: &EvaluationReport) -> String {
    let mut out = String::from(
        "program,mutant,operator,stmt_ordinal,line,technique,effort_original,effort_purified,outcome,stmt_save\n",
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.program,
            r.mutant,
            r.operator,
            r.stmt_ordinal,
            r.line,
            r.technique.name(),
            fmt4(r.effort_original),
            fmt4(r.effort_purified),
            r.outcome.name(),
            fmt4(r.stmt_save),
        );
    }
    out.push('\n');
    out.push_str(
        "technique,positive,negative,neutral,pct_positive,pct_negative,pct_neutral,\
         mean_effort_original,mean_effort_purified,\
         cat_optimal_count,cat_optimal_mean_save,cat_optimal_negatives,\
         cat_mid_count,cat_mid_mean_save,cat_mid_negatives,\
         cat_high_count,cat_high_mean_save,cat_high_negatives,optimal_preserved_pct\n",
    );
    for a in &report.aggregates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            a.technique.name(),
            a.positive,
            a.negative,
            a.neutral,
            fmt4(a.pct_positive),
            fmt4(a.pct_negative),
            fmt4(a.pct_neutral),
            fmt4(a.mean_effort_original),
            fmt4(a.mean_effort_purified),
            a.cat_optimal.count,
            fmt4(a.cat_optimal.mean_save),
            a.cat_optimal.negatives,
            a.cat_mid.count,
            fmt4(a.cat_mid.mean_save),
            a.cat_mid.negatives,
            a.cat_high.count,
            fmt4(a.cat_high.mean_save),
            a.cat_high.negatives,
            fmt4(a.optimal_preserved_pct),
        );
    }
    out
}

pub fn report_text(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "evaluation: {} mutants sampled (seed {}), purification {}",
        report.total_mutants,
        report.seed,
        if report.purify { "on" } else { "off" }
    );
    let _ = writeln!(out);
    for a in &report.aggregates {
        let _ = writeln!(
            out,
            "{:<13} positive {:>4} ({:>8}%)  negative {:>4} ({:>8}%)  neutral {:>4} ({:>8}%)",
            a.technique.name(),
            a.positive,
            fmt4(a.pct_positive),
            a.negative,
            fmt4(a.pct_negative),
            a.neutral,
            fmt4(a.pct_neutral),
        );
        let _ = writeln!(
            out,
            "{:<13} mean effort {} -> {}   optimal preserved {}%",
            "",
            fmt4(a.mean_effort_original),
            fmt4(a.mean_effort_purified),
            fmt4(a.optimal_preserved_pct),
        );
    }
    out
}

pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => report_json(report),
        ReportFormat::Csv => report_csv(report),
        ReportFormat::Text => report_text(report),
    }
}

pub fn write_report(
    report: &EvaluationReport,
    format: ReportFormat,
    path: &Path,
) -> std::io::Result<()> {
    std::fs::write(path, render_report(report, format))
}

/// Ranking export: one row per candidate statement, ordered by the operative
/// score (descending, ties by ordinal).
///
/// `efforts` gives each statement's wasted effort if it were the fault,
/// computed from whichever map drives the ranking.
pub fn ranking_csv(
    program: &Ast,
    refined: &RefinedScores,
    efforts: &BTreeMap<StatementId, f64>,
    operative: impl Fn(StatementId) -> f64,
) -> String {
    let mut ids: Vec<StatementId> = refined.keys().copied().collect();
    ids.sort_by(|&a, &b| {
        operative(b)
            .partial_cmp(&operative(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut out = String::from("ordinal,line,susp,norm,ratio,score,rank_effort_if_faulty\n");
    for id in ids {
        let r = &refined[&id];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            id.0,
            program.line_of(id),
            fmt4(r.susp),
            fmt4(r.norm),
            fmt4(r.ratio),
            fmt4(r.score),
            fmt4(efforts[&id]),
        );
    }
    out
}

/// One mutant-manifest line (JSON lines format).
pub fn manifest_line(program: &Ast, mutant: &Mutant, detected: bool) -> String {
    format!(
        "{{\"id\":{},\"operator\":{},\"stmt_ordinal\":{},\"line\":{},\"description\":{},\"detected\":{}}}",
        json_str(&mutant.id),
        json_str(mutant.operator.name()),
        mutant.stmt.0,
        program.line_of(mutant.stmt),
        json_str(&mutant.description),
        detected,
    )
}
