//! Spectrum matrix construction and suspiciousness metrics.
//!
//! The candidate set S is the program-function statements; test-body
//! statements are never ranked. A failing row is any non-passing outcome
//! (assertion failure, runtime error, or timeout).

use crate::frontend::{Ast, StatementId};
use crate::interpreter::{ExecutionTrace, TestOutcome};
use std::collections::BTreeMap;
use std::fmt;

/// Tests x statements coverage flags with per-test pass/fail outcomes.
#[derive(Debug, Clone)]
pub struct SpectrumMatrix {
    /// Candidate statements S, ordered by ordinal.
    pub statements: Vec<StatementId>,
    pub rows: Vec<SpectrumRow>,
}

#[derive(Debug, Clone)]
pub struct SpectrumRow {
    pub test: String,
    pub failed: bool,
    /// Coverage flags, indexed like `statements`.
    pub covered: Vec<bool>,
}

/// The four counters every metric is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageCounters {
    /// Failing tests executing the statement.
    pub a_ef: u32,
    /// Failing tests not executing it.
    pub a_nf: u32,
    /// Passing tests executing it.
    pub a_ep: u32,
    /// Passing tests not executing it.
    pub a_np: u32,
}

/// The six spectrum-based techniques in comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Technique {
    Tarantula,
    Sbi,
    Ochiai,
    Jaccard,
    Ochiai2,
    Kulczynski2,
}

impl Technique {
    pub const ALL: [Technique; 6] = [
        Technique::Tarantula,
        Technique::Sbi,
        Technique::Ochiai,
        Technique::Jaccard,
        Technique::Ochiai2,
        Technique::Kulczynski2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Tarantula => "tarantula",
            Technique::Sbi => "sbi",
            Technique::Ochiai => "ochiai",
            Technique::Jaccard => "jaccard",
            Technique::Ochiai2 => "ochiai2",
            Technique::Kulczynski2 => "kulczynski2",
        }
    }

    pub fn from_name(name: &str) -> Option<Technique> {
        Technique::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-statement suspiciousness over S.
pub type SuspiciousnessMap = BTreeMap<StatementId, f64>;

#[derive(Debug, thiserror::Error)]
pub enum SpectraError {
    #[error("empty test suite: no rows to build a spectrum matrix from")]
    EmptySuite,
    #[error("statement {0} is not in the candidate set")]
    UnknownStatement(StatementId),
    #[error("no failing test: localization is undefined on a green suite")]
    NoFailingTest,
}

/// Builds the matrix from per-test run results. Rows are ordered by test
/// name; statements by ordinal.
pub fn build_matrix(
    program: &Ast,
    suite_results: &BTreeMap<String, (TestOutcome, ExecutionTrace)>,
) -> Result<SpectrumMatrix, SpectraError> {
    if suite_results.is_empty() {
        return Err(SpectraError::EmptySuite);
    }
    let statements = program.program_statements();
    let index: BTreeMap<StatementId, usize> =
        statements.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let rows = suite_results
        .iter()
        .map(|(name, (outcome, trace))| {
            let mut covered = vec![false; statements.len()];
            for id in &trace.coverage {
                if let Some(&i) = index.get(id) {
                    covered[i] = true;
                }
            }
            SpectrumRow { test: name.clone(), failed: outcome.is_failing(), covered }
        })
        .collect();
    Ok(SpectrumMatrix { statements, rows })
}

impl SpectrumMatrix {
    pub fn failing_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.failed).count()
    }

    fn stmt_index(&self, stmt: StatementId) -> Result<usize, SpectraError> {
        self.statements
            .binary_search(&stmt)
            .map_err(|_| SpectraError::UnknownStatement(stmt))
    }

    /// CSV export: header `test,failed,<stmt ordinals...>`, bits as 0/1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("test,failed");
        for s in &self.statements {
            out.push_str(&format!(",{}", s.0));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.test);
            out.push_str(if row.failed { ",1" } else { ",0" });
            for &bit in &row.covered {
                out.push_str(if bit { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

/// Exact counts of the four alpha terms for one statement.
pub fn counters(matrix: &SpectrumMatrix, stmt: StatementId) -> Result<CoverageCounters, SpectraError> {
    let idx = matrix.stmt_index(stmt)?;
    let mut c = CoverageCounters { a_ef: 0, a_nf: 0, a_ep: 0, a_np: 0 };
    for row in &matrix.rows {
        match (row.failed, row.covered[idx]) {
            (true, true) => c.a_ef += 1,
            (true, false) => c.a_nf += 1,
            (false, true) => c.a_ep += 1,
            (false, false) => c.a_np += 1,
        }
    }
    Ok(c)
}

/// A fraction that evaluates to 0 when its denominator is 0.
fn frac(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Suspiciousness per the technique's formula. Any fraction with a zero
/// denominator evaluates to 0, so results are always finite and >= 0.
pub fn suspiciousness(c: CoverageCounters, technique: Technique) -> f64 {
    let ef = c.a_ef as f64;
    let nf = c.a_nf as f64;
    let ep = c.a_ep as f64;
    let np = c.a_np as f64;
    match technique {
        Technique::Tarantula => {
            let f = frac(ef, ef + nf);
            let p = frac(ep, ep + np);
            frac(f, f + p)
        }
        Technique::Sbi => frac(ef, ef + nf),
        Technique::Ochiai => frac(ef, ((ef + nf) * (ef + ep)).sqrt()),
        Technique::Jaccard => frac(ef, ef + nf + ep),
        Technique::Ochiai2 => {
            frac(ef * np, ((ef + ep) * (np + nf) * (ef + nf) * (ep + np)).sqrt())
        }
        Technique::Kulczynski2 => 0.5 * (frac(ef, ef + nf) + frac(ef, ef + ep)),
    }
}

/// Suspiciousness for every statement in S.
pub fn localize(
    matrix: &SpectrumMatrix,
    technique: Technique,
) -> Result<SuspiciousnessMap, SpectraError> {
    if matrix.failing_rows() == 0 {
        return Err(SpectraError::NoFailingTest);
    }
    matrix
        .statements
        .iter()
        .map(|&s| Ok((s, suspiciousness(counters(matrix, s)?, technique))))
        .collect()
}
