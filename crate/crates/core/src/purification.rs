//! Test case purification: atomization, dynamic backward slicing of failing
//! single-assertion variants, and collection of their deduplicated spectra.

use crate::frontend::*;
use crate::interpreter::{run_test_def, ExecutionTrace};
use std::collections::{BTreeMap, BTreeSet};

/// A single-assertion variant of an originally failing test: one assertion
/// kept hard, every other assertion converted to its soft form.
#[derive(Debug, Clone)]
pub struct AtomizedTest {
    pub origin: String,
    /// 1-based index of the kept assertion within the origin test.
    pub index: usize,
    pub kept_assertion: StatementId,
    pub body: TestDef,
}

/// Slicing criterion <b, V>: the broken statement's final trace occurrence
/// and the variables observed there.
#[derive(Debug, Clone)]
pub struct SliceCriterion {
    /// Event index of the broken statement's final occurrence.
    pub b: usize,
    /// The uses-set of event `b`.
    pub vars: BTreeSet<String>,
}

/// A sliced (or fallback) single-assertion test.
#[derive(Debug, Clone)]
pub struct PurifiedTest {
    pub origin: String,
    pub kept_assertion: StatementId,
    pub body: TestDef,
    /// True when slicing was abandoned and the unsliced variant's spectrum
    /// was used instead.
    pub fallback: bool,
}

/// Deduplicated coverage rows of the failing purified tests, over the
/// candidate set S.
#[derive(Debug, Clone)]
pub struct PurifiedSpectra {
    pub statements: Vec<StatementId>,
    pub rows: Vec<PurifiedRow>,
}

#[derive(Debug, Clone)]
pub struct PurifiedRow {
    pub origin: String,
    pub kept_assertion: Option<StatementId>,
    pub covered: Vec<bool>,
}

impl PurifiedSpectra {
    pub fn empty(statements: Vec<StatementId>) -> Self {
        PurifiedSpectra { statements, rows: Vec::new() }
    }

    /// (beta_ef, beta_nf): purified failing rows covering / not covering the
    /// statement.
    pub fn beta(&self, stmt: StatementId) -> (u32, u32) {
        match self.statements.binary_search(&stmt) {
            Ok(idx) => {
                let ef = self.rows.iter().filter(|r| r.covered[idx]).count() as u32;
                (ef, self.rows.len() as u32 - ef)
            }
            Err(_) => (0, self.rows.len() as u32),
        }
    }
}

/// Full purification output, including replay bookkeeping for reporting.
#[derive(Debug, Clone)]
pub struct PurifyResult {
    pub tests: Vec<PurifiedTest>,
    pub spectra: PurifiedSpectra,
    /// Sliced variants whose replay reproduced the original broken statement.
    pub replayed_ok: usize,
    /// Variants routed through the fallback (slice discarded).
    pub fallbacks: usize,
    pub notes: Vec<String>,
    /// Time spent generating and executing single-assertion variants.
    pub atomize_nanos: u128,
    /// Time spent slicing and replaying.
    pub slice_nanos: u128,
}

fn make_soft(kind: &StmtKind, soft: bool) -> StmtKind {
    match kind {
        StmtKind::Assert { cond, .. } => StmtKind::Assert { soft, cond: cond.clone() },
        StmtKind::AssertEq { lhs, rhs, .. } => {
            StmtKind::AssertEq { soft, lhs: lhs.clone(), rhs: rhs.clone() }
        }
        other => other.clone(),
    }
}

fn atomize_block(block: &[Stmt], kept: StatementId) -> Vec<Stmt> {
    block
        .iter()
        .map(|s| {
            let kind = match &s.kind {
                StmtKind::If { cond, then_block, else_block } => StmtKind::If {
                    cond: cond.clone(),
                    then_block: atomize_block(then_block, kept),
                    else_block: else_block.as_ref().map(|b| atomize_block(b, kept)),
                },
                StmtKind::While { cond, body } => {
                    StmtKind::While { cond: cond.clone(), body: atomize_block(body, kept) }
                }
                k if s.is_assertion() => make_soft(k, s.id != kept),
                k => k.clone(),
            };
            Stmt { id: s.id, span: s.span.clone(), kind }
        })
        .collect()
}

/// Creates the k single-assertion variants of a test with k assertions.
/// A single-assertion test yields one variant identical to the original;
/// a test without assertions yields an empty list.
pub fn atomize(test: &TestDef) -> Vec<AtomizedTest> {
    test.assertion_ids()
        .into_iter()
        .enumerate()
        .map(|(i, kept)| AtomizedTest {
            origin: test.name.clone(),
            index: i + 1,
            kept_assertion: kept,
            body: TestDef {
                name: format!("{}__a{}", test.name, i + 1),
                body: atomize_block(&test.body, kept),
                span: test.span.clone(),
            },
        })
        .collect()
}

/// One failing atomized variant with its broken statement.
#[derive(Debug)]
pub struct ExecutedVariant {
    pub variant: AtomizedTest,
    pub broken: StatementId,
    pub trace: ExecutionTrace,
}

/// Runs the variants and keeps the failing ones (assertion failure or
/// runtime error) together with their broken statements. Passing variants
/// are dropped; timeouts are excluded because no broken statement exists.
pub fn execute_atomized(
    program: &Ast,
    variants: Vec<AtomizedTest>,
    step_budget: usize,
) -> Vec<ExecutedVariant> {
    variants
        .into_iter()
        .filter_map(|variant| {
            let (outcome, trace) = run_test_def(program, &variant.body, step_budget);
            outcome.broken().map(|broken| ExecutedVariant { variant, broken, trace })
        })
        .collect()
}

/// The criterion for a trace that broke at `broken`: the last occurrence of
/// that statement and the variables used there.
pub fn criterion_for(trace: &ExecutionTrace, broken: StatementId) -> Option<SliceCriterion> {
    trace
        .events
        .iter()
        .rev()
        .find(|e| e.stmt == broken)
        .map(|e| SliceCriterion { b: e.index, vars: e.uses.clone() })
}

/// Transitive dynamic backward slice from the criterion event: last-definition
/// data dependence plus control dependence. Returns the test-body statement
/// ids in the slice; the broken statement's id is always included.
pub fn backward_slice(
    program: &Ast,
    trace: &ExecutionTrace,
    criterion: &SliceCriterion,
) -> BTreeSet<StatementId> {
    assert!(criterion.b < trace.events.len(), "criterion event must exist in the trace");
    // def indices per qualified variable, ascending.
    let mut def_sites: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for e in &trace.events {
        for d in &e.defs {
            def_sites.entry(d.as_str()).or_default().push(e.index);
        }
    }
    let last_def_before = |var: &str, idx: usize| -> Option<usize> {
        let sites = def_sites.get(var)?;
        let pos = sites.partition_point(|&i| i < idx);
        (pos > 0).then(|| sites[pos - 1])
    };

    let mut in_slice = vec![false; trace.events.len()];
    let mut worklist = vec![criterion.b];
    in_slice[criterion.b] = true;
    while let Some(idx) = worklist.pop() {
        let event = &trace.events[idx];
        if let Some(p) = event.control_parent {
            if !in_slice[p] {
                in_slice[p] = true;
                worklist.push(p);
            }
        }
        for var in &event.uses {
            if let Some(d) = last_def_before(var, idx) {
                if !in_slice[d] {
                    in_slice[d] = true;
                    worklist.push(d);
                }
            }
        }
    }

    let test_ids = program.test_statement_ids();
    let mut slice: BTreeSet<StatementId> = trace
        .events
        .iter()
        .filter(|e| in_slice[e.index])
        .map(|e| e.stmt)
        .filter(|id| test_ids.contains(id))
        .collect();
    let broken = trace.events[criterion.b].stmt;
    if test_ids.contains(&broken) {
        slice.insert(broken);
    }
    slice
}

/// Removal granularity: a compound statement is retained whole iff its
/// predicate or any nested statement is in the slice, so the body stays
/// parseable.
fn filter_block(block: &[Stmt], keep: &BTreeSet<StatementId>, kept_assertion: StatementId) -> Vec<Stmt> {
    block
        .iter()
        .filter(|s| {
            s.preorder()
                .iter()
                .any(|n| keep.contains(&n.id) || n.id == kept_assertion)
        })
        .cloned()
        .collect()
}

/// Runs the whole purification pipeline over the failing tests of a suite:
/// atomize, execute, slice, replay, collect deduplicated spectra.
///
/// `step_budget` maps a test name to the budget for it and all its variants.
pub fn purify(
    program: &Ast,
    failing_tests: &[String],
    step_budget: impl Fn(&str) -> usize,
) -> PurifyResult {
    let statements = program.program_statements();
    let stmt_index: BTreeMap<StatementId, usize> =
        statements.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let cover_row = |trace: &ExecutionTrace| -> Vec<bool> {
        let mut row = vec![false; statements.len()];
        for id in &trace.coverage {
            if let Some(&i) = stmt_index.get(id) {
                row[i] = true;
            }
        }
        row
    };

    let mut names: Vec<&String> = failing_tests.iter().collect();
    names.sort();

    let mut tests = Vec::new();
    let mut rows: Vec<PurifiedRow> = Vec::new();
    let mut replayed_ok = 0;
    let mut fallbacks = 0;
    let mut notes = Vec::new();
    let mut atomize_nanos = 0u128;
    let mut slice_nanos = 0u128;

    for name in names {
        let test = match program.test(name) {
            Some(t) => t,
            None => {
                notes.push(format!("skipping unknown test `{name}`"));
                continue;
            }
        };
        let budget = step_budget(name);
        let atomize_start = std::time::Instant::now();
        let variants = atomize(test);
        if variants.is_empty() {
            // No assertions to atomize: the original spectrum passes through
            // unsliced.
            let (outcome, trace) = run_test_def(program, test, budget);
            if outcome.is_failing() {
                rows.push(PurifiedRow {
                    origin: name.clone(),
                    kept_assertion: None,
                    covered: cover_row(&trace),
                });
            }
            notes.push(format!("test `{name}` has no assertions; spectrum passed through"));
            continue;
        }
        let executed = execute_atomized(program, variants, budget);
        atomize_nanos += atomize_start.elapsed().as_nanos();
        if executed.is_empty() {
            // Every variant passed or timed out: fall back to the original
            // failing test's spectrum as one purified row.
            let (outcome, trace) = run_test_def(program, test, budget);
            if outcome.is_failing() {
                rows.push(PurifiedRow {
                    origin: name.clone(),
                    kept_assertion: None,
                    covered: cover_row(&trace),
                });
            }
            notes.push(format!("no failing variant for `{name}`; original spectrum used"));
            continue;
        }
        let slice_start = std::time::Instant::now();
        for ExecutedVariant { variant, broken, trace } in executed {
            let criterion = criterion_for(&trace, broken)
                .expect("broken statement always has a trace event");
            let slice = backward_slice(program, &trace, &criterion);
            let sliced_body = TestDef {
                name: variant.body.name.clone(),
                body: filter_block(&variant.body.body, &slice, variant.kept_assertion),
                span: variant.body.span.clone(),
            };
            let (replay_outcome, replay_trace) = run_test_def(program, &sliced_body, budget);
            let preserved = replay_outcome.broken() == Some(broken);
            if preserved {
                replayed_ok += 1;
                rows.push(PurifiedRow {
                    origin: variant.origin.clone(),
                    kept_assertion: Some(variant.kept_assertion),
                    covered: cover_row(&replay_trace),
                });
                tests.push(PurifiedTest {
                    origin: variant.origin,
                    kept_assertion: variant.kept_assertion,
                    body: sliced_body,
                    fallback: false,
                });
            } else {
                // The slice did not reproduce the failure: discard it and use
                // the unsliced variant's spectrum.
                fallbacks += 1;
                rows.push(PurifiedRow {
                    origin: variant.origin.clone(),
                    kept_assertion: Some(variant.kept_assertion),
                    covered: cover_row(&trace),
                });
                tests.push(PurifiedTest {
                    origin: variant.origin,
                    kept_assertion: variant.kept_assertion,
                    body: variant.body,
                    fallback: true,
                });
            }
        }
        slice_nanos += slice_start.elapsed().as_nanos();
    }

    // Dedup by exact coverage bitset, first row (by construction order:
    // origin name, then kept assertion ordinal) kept.
    let mut seen: Vec<&Vec<bool>> = Vec::new();
    let mut deduped = Vec::new();
    for row in &rows {
        if !seen.contains(&&row.covered) {
            seen.push(&row.covered);
            deduped.push(row.clone());
        }
    }

    PurifyResult {
        tests,
        spectra: PurifiedSpectra { statements, rows: deduped },
        replayed_ok,
        fallbacks,
        notes,
        atomize_nanos,
        slice_nanos,
    }
}
