//! Mutation-based fault seeding: six single-change operators over program
//! function bodies, detection filtering against the test suite, and seeded
//! sampling of an evaluation set.

use crate::frontend::*;
use crate::interpreter::run_suite;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// The six operator classes. Tests are never mutated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MutationOperator {
    /// Invert a numeric literal's sign (or drop an existing unary minus).
    InvertNegatives,
    /// Flip a boolean return value; add 1 to a numeric one.
    ReturnValues,
    /// Replace an arithmetic operator: + <-> -, * <-> /, % -> *.
    Math,
    /// Negate an if/while condition; swap == and !=.
    NegateConditionals,
    /// Swap < with <= and > with >=.
    ConditionalBoundary,
    /// Swap += and -=.
    Increments,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 6] = [
        MutationOperator::InvertNegatives,
        MutationOperator::ReturnValues,
        MutationOperator::Math,
        MutationOperator::NegateConditionals,
        MutationOperator::ConditionalBoundary,
        MutationOperator::Increments,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationOperator::InvertNegatives => "invert_negatives",
            MutationOperator::ReturnValues => "return_values",
            MutationOperator::Math => "math",
            MutationOperator::NegateConditionals => "negate_conditionals",
            MutationOperator::ConditionalBoundary => "conditional_boundary",
            MutationOperator::Increments => "increments",
        }
    }

    pub fn from_name(name: &str) -> Option<MutationOperator> {
        MutationOperator::ALL.into_iter().find(|o| o.name() == name)
    }
}

/// The concrete edit a mutation point performs on its statement's expression.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Edit {
    /// Toggle the sign of the node at the path.
    InvertSign,
    /// `return e` -> `return !e` (boolean) or `return e + 1` (numeric).
    TweakReturn,
    /// Replace the binary operator at the path.
    ReplaceOp(BinOp),
    /// Wrap the if/while condition in `!(...)`.
    NegateCondition,
    /// `+=` <-> `-=`.
    FlipCompound,
}

/// An applicable location for one operator.
#[derive(Debug, Clone)]
pub struct MutationPoint {
    pub operator: MutationOperator,
    pub stmt: StatementId,
    /// Index path into the statement's expression; empty for whole-statement
    /// edits.
    pub path: Vec<usize>,
    edit: Edit,
}

/// A single-change program variant. The target statement is the ground-truth
/// faulty statement for evaluation.
#[derive(Debug, Clone)]
pub struct Mutant {
    pub id: String,
    pub operator: MutationOperator,
    pub stmt: StatementId,
    pub path: Vec<usize>,
    pub program: Ast,
    pub description: String,
}

#[derive(Debug, thiserror::Error)]
pub enum MutationError {
    #[error("original test suite is not green: test `{0}` does not pass")]
    SuiteNotGreen(String),
    #[error("sample size {n} exceeds available mutants {available}")]
    SampleTooLarge { n: usize, available: usize },
}

/// A syntactically boolean expression; used to pick the ReturnValues edit.
fn is_boolean_expr(e: &Expr) -> bool {
    match e {
        Expr::Bool(_) => true,
        Expr::Unary { op: UnaryOp::Not, .. } => true,
        Expr::Binary { op, .. } => op.is_comparison() || matches!(op, BinOp::And | BinOp::Or),
        Expr::Call { callee, .. } => callee == "is_nan",
        _ => false,
    }
}

/// The single expression owned by a function-body statement, if any.
fn stmt_expr(kind: &StmtKind) -> Option<&Expr> {
    match kind {
        StmtKind::Let { value, .. }
        | StmtKind::Assign { value, .. }
        | StmtKind::Compound { value, .. } => Some(value),
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
        StmtKind::Return { value } => value.as_ref(),
        StmtKind::Expr { expr } => Some(expr),
        StmtKind::Assert { cond, .. } => Some(cond),
        StmtKind::AssertEq { .. } => None,
    }
}

fn stmt_expr_mut(kind: &mut StmtKind) -> Option<&mut Expr> {
    match kind {
        StmtKind::Let { value, .. }
        | StmtKind::Assign { value, .. }
        | StmtKind::Compound { value, .. } => Some(value),
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
        StmtKind::Return { value } => value.as_mut(),
        StmtKind::Expr { expr } => Some(expr),
        StmtKind::Assert { cond, .. } => Some(cond),
        StmtKind::AssertEq { .. } => None,
    }
}

fn walk_expr<'a>(e: &'a Expr, path: &mut Vec<usize>, visit: &mut impl FnMut(&'a Expr, &[usize])) {
    visit(e, path);
    for (i, child) in e.children().into_iter().enumerate() {
        path.push(i);
        walk_expr(child, path, visit);
        path.pop();
    }
}

fn points_in_expr(
    op: MutationOperator,
    stmt: &Stmt,
    expr: &Expr,
    out: &mut Vec<MutationPoint>,
) {
    let mut path = Vec::new();
    walk_expr(expr, &mut path, &mut |node, path| {
        let edit = match (op, node) {
            (MutationOperator::InvertNegatives, Expr::Unary { op: UnaryOp::Neg, .. }) => {
                Some(Edit::InvertSign)
            }
            (MutationOperator::InvertNegatives, Expr::Number(n)) => {
                // Skip literals whose inversion is behaviorally inert (0, nan)
                // and literals already covered by an enclosing unary minus.
                let under_minus = !path.is_empty()
                    && matches!(
                        expr.at_path(&path[..path.len() - 1]),
                        Some(Expr::Unary { op: UnaryOp::Neg, .. })
                    );
                (*n != 0.0 && !n.is_nan() && !under_minus).then_some(Edit::InvertSign)
            }
            (MutationOperator::Math, Expr::Binary { op: b, .. }) if b.is_arithmetic() => {
                let replacement = match b {
                    BinOp::Add => BinOp::Sub,
                    BinOp::Sub => BinOp::Add,
                    BinOp::Mul => BinOp::Div,
                    BinOp::Div => BinOp::Mul,
                    BinOp::Rem => BinOp::Mul,
                    _ => unreachable!(),
                };
                Some(Edit::ReplaceOp(replacement))
            }
            (MutationOperator::NegateConditionals, Expr::Binary { op: BinOp::Eq, .. }) => {
                Some(Edit::ReplaceOp(BinOp::Ne))
            }
            (MutationOperator::NegateConditionals, Expr::Binary { op: BinOp::Ne, .. }) => {
                Some(Edit::ReplaceOp(BinOp::Eq))
            }
            (MutationOperator::ConditionalBoundary, Expr::Binary { op: b, .. }) => {
                match b {
                    BinOp::Lt => Some(Edit::ReplaceOp(BinOp::Le)),
                    BinOp::Le => Some(Edit::ReplaceOp(BinOp::Lt)),
                    BinOp::Gt => Some(Edit::ReplaceOp(BinOp::Ge)),
                    BinOp::Ge => Some(Edit::ReplaceOp(BinOp::Gt)),
                    _ => None,
                }
            }
            _ => None,
        };
        if let Some(edit) = edit {
            out.push(MutationPoint { operator: op, stmt: stmt.id, path: path.to_vec(), edit });
        }
    });
}

/// All applicable locations of one operator within the program's function
/// bodies, ordered by (statement ordinal, path).
pub fn mutation_points(program: &Ast, op: MutationOperator) -> Vec<MutationPoint> {
    let mut out = Vec::new();
    for func in &program.functions {
        for stmt in block_preorder(&func.body) {
            match op {
                MutationOperator::ReturnValues => {
                    if matches!(stmt.kind, StmtKind::Return { value: Some(_) }) {
                        out.push(MutationPoint {
                            operator: op,
                            stmt: stmt.id,
                            path: vec![],
                            edit: Edit::TweakReturn,
                        });
                    }
                }
                MutationOperator::Increments => {
                    if matches!(stmt.kind, StmtKind::Compound { .. }) {
                        out.push(MutationPoint {
                            operator: op,
                            stmt: stmt.id,
                            path: vec![],
                            edit: Edit::FlipCompound,
                        });
                    }
                }
                MutationOperator::NegateConditionals => {
                    if matches!(stmt.kind, StmtKind::If { .. } | StmtKind::While { .. }) {
                        out.push(MutationPoint {
                            operator: op,
                            stmt: stmt.id,
                            path: vec![],
                            edit: Edit::NegateCondition,
                        });
                    }
                    if let Some(expr) = stmt_expr(&stmt.kind) {
                        points_in_expr(op, stmt, expr, &mut out);
                    }
                }
                _ => {
                    if let Some(expr) = stmt_expr(&stmt.kind) {
                        points_in_expr(op, stmt, expr, &mut out);
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| (a.stmt, &a.path).cmp(&(b.stmt, &b.path)));
    out
}

fn func_stmt_mut(ast: &mut Ast, id: StatementId) -> Option<&mut Stmt> {
    fn in_block(block: &mut [Stmt], id: StatementId) -> Option<&mut Stmt> {
        for s in block {
            if s.id == id {
                return Some(s);
            }
            let found = match &mut s.kind {
                StmtKind::If { then_block, else_block, .. } => in_block(then_block, id)
                    .or_else(|| else_block.as_mut().and_then(|b| in_block(b, id))),
                StmtKind::While { body, .. } => in_block(body, id),
                _ => None,
            };
            if found.is_some() {
                return found;
            }
        }
        None
    }
    ast.functions.iter_mut().find_map(|f| in_block(&mut f.body, id))
}

/// Applies one point to a fresh copy of the program. Returns the mutated
/// program and a before/after description of the changed node.
fn apply(program: &Ast, point: &MutationPoint) -> Option<(Ast, String)> {
    let mut mutated = program.clone();
    let stmt = func_stmt_mut(&mut mutated, point.stmt)?;
    let description;
    match &point.edit {
        Edit::FlipCompound => {
            if let StmtKind::Compound { op, .. } = &mut stmt.kind {
                let old = op.symbol();
                *op = op.flipped();
                description = format!("`{}` -> `{}`", old, op.symbol());
            } else {
                return None;
            }
        }
        Edit::NegateCondition => {
            let expr = stmt_expr_mut(&mut stmt.kind)?;
            let old = printer::expr_str(expr);
            let inner = std::mem::replace(expr, Expr::Bool(false));
            *expr = Expr::Unary { op: UnaryOp::Not, expr: Box::new(inner) };
            description = format!("`{}` -> `{}`", old, printer::expr_str(expr));
        }
        Edit::TweakReturn => {
            let expr = stmt_expr_mut(&mut stmt.kind)?;
            let old = printer::expr_str(expr);
            let inner = std::mem::replace(expr, Expr::Bool(false));
            *expr = if is_boolean_expr(&inner) {
                Expr::Unary { op: UnaryOp::Not, expr: Box::new(inner) }
            } else {
                Expr::Binary {
                    op: BinOp::Add,
                    lhs: Box::new(inner),
                    rhs: Box::new(Expr::Number(1.0)),
                }
            };
            description = format!("`{}` -> `{}`", old, printer::expr_str(expr));
        }
        Edit::InvertSign => {
            let root = stmt_expr_mut(&mut stmt.kind)?;
            let node = root.at_path_mut(&point.path)?;
            let old = printer::expr_str(node);
            match node {
                Expr::Unary { op: UnaryOp::Neg, expr } => {
                    *node = (**expr).clone();
                }
                Expr::Number(_) => {
                    let inner = std::mem::replace(node, Expr::Bool(false));
                    *node = Expr::Unary { op: UnaryOp::Neg, expr: Box::new(inner) };
                }
                _ => return None,
            }
            description = format!("`{}` -> `{}`", old, printer::expr_str(node));
        }
        Edit::ReplaceOp(new_op) => {
            let root = stmt_expr_mut(&mut stmt.kind)?;
            let node = root.at_path_mut(&point.path)?;
            if let Expr::Binary { op, .. } = node {
                let old = op.symbol();
                *op = *new_op;
                description = format!("`{}` -> `{}`", old, new_op.symbol());
            } else {
                return None;
            }
        }
    }
    Some((mutated, description))
}

/// Generates one mutant per applicable point, in deterministic order by
/// (operator, statement ordinal, path). `cap_per_operator` keeps at most
/// that many points per operator, sampled with `seed` when over the cap.
pub fn generate(program: &Ast, seed: u64, cap_per_operator: Option<usize>) -> Vec<Mutant> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mutants = Vec::new();
    for op in MutationOperator::ALL {
        let mut points = mutation_points(program, op);
        if let Some(cap) = cap_per_operator {
            if points.len() > cap {
                let mut idx: Vec<usize> =
                    rand::seq::index::sample(&mut rng, points.len(), cap).into_vec();
                idx.sort_unstable();
                points = idx.into_iter().map(|i| points[i].clone()).collect();
            }
        }
        for point in points {
            if let Some((mutated, desc)) = apply(program, &point) {
                let id = format!("m{:04}", mutants.len());
                let line = program.line_of(point.stmt);
                mutants.push(Mutant {
                    id,
                    operator: op,
                    stmt: point.stmt,
                    path: point.path,
                    program: mutated,
                    description: format!("{} L{}: {}", point.stmt, line, desc),
                });
            }
        }
    }
    mutants
}

/// Per-test step budgets for mutant execution: `mult` times the test's step
/// count on the original program, floored at 1000.
pub fn detection_budgets(
    original: &Ast,
    base_budget: usize,
    mult: usize,
) -> Result<BTreeMap<String, usize>, MutationError> {
    let results = run_suite(original, base_budget);
    for (name, (outcome, _)) in &results {
        if !outcome.is_pass() {
            return Err(MutationError::SuiteNotGreen(name.clone()));
        }
    }
    Ok(results
        .into_iter()
        .map(|(name, (_, trace))| (name, (mult * trace.step_count).max(1000)))
        .collect())
}

/// Whether at least one test fails, errors, or times out on the mutant.
pub fn is_detected(mutant: &Mutant, budgets: &BTreeMap<String, usize>) -> bool {
    mutant.program.tests.iter().any(|t| {
        let budget = budgets.get(&t.name).copied().unwrap_or(1000);
        let (outcome, _) = crate::interpreter::run_test_def(&mutant.program, t, budget);
        outcome.is_failing()
    })
}

/// Keeps exactly the mutants detected by the suite. Errors when the original
/// suite is not green.
pub fn filter_detected(
    original: &Ast,
    mutants: Vec<Mutant>,
    base_budget: usize,
    mult: usize,
) -> Result<Vec<Mutant>, MutationError> {
    let budgets = detection_budgets(original, base_budget, mult)?;
    Ok(mutants.into_iter().filter(|m| is_detected(m, &budgets)).collect())
}

/// Uniform sample of n mutants without replacement, reproducible by seed.
/// Original relative order is preserved.
pub fn sample(mutants: Vec<Mutant>, n: usize, seed: u64) -> Result<Vec<Mutant>, MutationError> {
    if n > mutants.len() {
        return Err(MutationError::SampleTooLarge { n, available: mutants.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = rand::seq::index::sample(&mut rng, mutants.len(), n).into_vec();
    idx.sort_unstable();
    let mut keep = vec![false; mutants.len()];
    for i in idx {
        keep[i] = true;
    }
    Ok(mutants
        .into_iter()
        .zip(keep)
        .filter_map(|(m, k)| k.then_some(m))
        .collect())
}
