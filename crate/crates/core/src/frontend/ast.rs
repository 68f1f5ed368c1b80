//! MiniLang abstract syntax tree.
//!
//! Every statement carries a [`StatementId`] whose ordinal is assigned in
//! pre-order during parsing. Ordinals are dense: `max ordinal + 1` equals the
//! total statement count, and re-parsing identical source yields identical
//! ordinals.

use std::collections::BTreeSet;
use std::fmt;

/// Position of a syntactic element in its source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: String,
    /// 1-based line.
    pub line: u32,
    /// 1-based column.
    pub column: u32,
    /// Length in characters.
    pub length: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, line: u32, column: u32, length: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceSpan { file: file.into(), line, column, length }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// Stable identity of a statement: its pre-order ordinal within the parsed
/// program. This is the coverage entity everything downstream ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StatementId(pub u32);

impl StatementId {
    pub fn ordinal(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

/// `+=` / `-=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompoundOp {
    AddAssign,
    SubAssign,
}

impl CompoundOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompoundOp::AddAssign => "+=",
            CompoundOp::SubAssign => "-=",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            CompoundOp::AddAssign => CompoundOp::SubAssign,
            CompoundOp::SubAssign => CompoundOp::AddAssign,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Expr {
    /// binary64 literal; `nan` is a valid literal.
    Number(f64),
    Bool(bool),
    Str(String),
    Var(String),
    Unary { op: UnaryOp, expr: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { callee: String, args: Vec<Expr> },
}

// Structural equality: number literals compare by bit pattern so the `nan`
// literal equals itself.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Number(a), Expr::Number(b)) => a.to_bits() == b.to_bits(),
            (Expr::Bool(a), Expr::Bool(b)) => a == b,
            (Expr::Str(a), Expr::Str(b)) => a == b,
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Unary { op: oa, expr: ea }, Expr::Unary { op: ob, expr: eb }) => {
                oa == ob && ea == eb
            }
            (
                Expr::Binary { op: oa, lhs: la, rhs: ra },
                Expr::Binary { op: ob, lhs: lb, rhs: rb },
            ) => oa == ob && la == lb && ra == rb,
            (Expr::Call { callee: ca, args: aa }, Expr::Call { callee: cb, args: ab }) => {
                ca == cb && aa == ab
            }
            _ => false,
        }
    }
}

impl Expr {
    /// Number of nodes in this expression tree.
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Number(_) | Expr::Bool(_) | Expr::Str(_) | Expr::Var(_) => 1,
            Expr::Unary { expr, .. } => 1 + expr.node_count(),
            Expr::Binary { lhs, rhs, .. } => 1 + lhs.node_count() + rhs.node_count(),
            Expr::Call { args, .. } => 1 + args.iter().map(Expr::node_count).sum::<usize>(),
        }
    }

    /// Child expressions in order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Number(_) | Expr::Bool(_) | Expr::Str(_) | Expr::Var(_) => vec![],
            Expr::Unary { expr, .. } => vec![expr],
            Expr::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            Expr::Call { args, .. } => args.iter().collect(),
        }
    }

    pub fn child_mut(&mut self, idx: usize) -> Option<&mut Expr> {
        match self {
            Expr::Number(_) | Expr::Bool(_) | Expr::Str(_) | Expr::Var(_) => None,
            Expr::Unary { expr, .. } => (idx == 0).then(|| expr.as_mut()),
            Expr::Binary { lhs, rhs, .. } => match idx {
                0 => Some(lhs.as_mut()),
                1 => Some(rhs.as_mut()),
                _ => None,
            },
            Expr::Call { args, .. } => args.get_mut(idx),
        }
    }

    /// Follows an index path to a subexpression.
    pub fn at_path(&self, path: &[usize]) -> Option<&Expr> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> Option<&mut Expr> {
        let mut cur = self;
        for &i in path {
            cur = cur.child_mut(i)?;
        }
        Some(cur)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Let { name: String, value: Expr },
    Assign { name: String, value: Expr },
    Compound { name: String, op: CompoundOp, value: Expr },
    If { cond: Expr, then_block: Vec<Stmt>, else_block: Option<Vec<Stmt>> },
    While { cond: Expr, body: Vec<Stmt> },
    Return { value: Option<Expr> },
    Expr { expr: Expr },
    /// `assert(cond)` / `soft_assert(cond)`.
    Assert { soft: bool, cond: Expr },
    /// `assert_eq(lhs, rhs)` / `soft_assert_eq(lhs, rhs)`.
    AssertEq { soft: bool, lhs: Expr, rhs: Expr },
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub id: StatementId,
    pub span: SourceSpan,
    pub kind: StmtKind,
}

// Spans are ignored: two statements are equal when id and kind match.
impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.kind == other.kind
    }
}

impl Stmt {
    pub fn is_assertion(&self) -> bool {
        matches!(self.kind, StmtKind::Assert { .. } | StmtKind::AssertEq { .. })
    }

    pub fn is_hard_assertion(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::Assert { soft: false, .. } | StmtKind::AssertEq { soft: false, .. }
        )
    }

    /// All statements of this subtree in pre-order, including `self`.
    pub fn preorder(&self) -> Vec<&Stmt> {
        let mut out = vec![self];
        match &self.kind {
            StmtKind::If { then_block, else_block, .. } => {
                for s in then_block {
                    out.extend(s.preorder());
                }
                if let Some(eb) = else_block {
                    for s in eb {
                        out.extend(s.preorder());
                    }
                }
            }
            StmtKind::While { body, .. } => {
                for s in body {
                    out.extend(s.preorder());
                }
            }
            _ => {}
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct FuncDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub struct TestDef {
    pub name: String,
    pub body: Vec<Stmt>,
    pub span: SourceSpan,
}

impl TestDef {
    /// Statement ids of all assertion statements in the test body, in
    /// pre-order.
    pub fn assertion_ids(&self) -> Vec<StatementId> {
        block_preorder(&self.body)
            .into_iter()
            .filter(|s| s.is_assertion())
            .map(|s| s.id)
            .collect()
    }
}

pub fn block_preorder(block: &[Stmt]) -> Vec<&Stmt> {
    block.iter().flat_map(Stmt::preorder).collect()
}

/// A parsed MiniLang program: functions plus embedded tests.
#[derive(Debug, Clone)]
pub struct Ast {
    pub functions: Vec<FuncDef>,
    pub tests: Vec<TestDef>,
    /// Total statement count; ordinals are `0..stmt_count`.
    pub stmt_count: usize,
}

impl Ast {
    /// The candidate set S: ids of all program-function statements, ordered
    /// by ordinal. Test-body statements are excluded.
    pub fn program_statements(&self) -> Vec<StatementId> {
        let mut ids: Vec<StatementId> = self
            .functions
            .iter()
            .flat_map(|f| block_preorder(&f.body))
            .map(|s| s.id)
            .collect();
        ids.sort();
        ids
    }

    pub fn test_statement_ids(&self) -> BTreeSet<StatementId> {
        self.tests
            .iter()
            .flat_map(|t| block_preorder(&t.body))
            .map(|s| s.id)
            .collect()
    }

    pub fn is_test_statement(&self, id: StatementId) -> bool {
        self.test_statement_ids().contains(&id)
    }

    pub fn function(&self, name: &str) -> Option<&FuncDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn test(&self, name: &str) -> Option<&TestDef> {
        self.tests.iter().find(|t| t.name == name)
    }

    /// Looks up a statement by id anywhere in the program.
    pub fn statement(&self, id: StatementId) -> Option<&Stmt> {
        self.all_statements().into_iter().find(|s| s.id == id)
    }

    pub fn all_statements(&self) -> Vec<&Stmt> {
        let mut out: Vec<&Stmt> = self
            .functions
            .iter()
            .flat_map(|f| block_preorder(&f.body))
            .collect();
        out.extend(self.tests.iter().flat_map(|t| block_preorder(&t.body)));
        out.sort_by_key(|s| s.id);
        out
    }

    /// Source line of a statement, for reports.
    pub fn line_of(&self, id: StatementId) -> u32 {
        self.statement(id).map(|s| s.span.line).unwrap_or(0)
    }
}

fn block_eq(a: &[Stmt], b: &[Stmt]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| stmt_eq(x, y))
}

fn stmt_eq(a: &Stmt, b: &Stmt) -> bool {
    if a.id != b.id {
        return false;
    }
    match (&a.kind, &b.kind) {
        (
            StmtKind::If { cond: ca, then_block: ta, else_block: ea },
            StmtKind::If { cond: cb, then_block: tb, else_block: eb },
        ) => {
            ca == cb
                && block_eq(ta, tb)
                && match (ea, eb) {
                    (None, None) => true,
                    (Some(x), Some(y)) => block_eq(x, y),
                    _ => false,
                }
        }
        (StmtKind::While { cond: ca, body: ba }, StmtKind::While { cond: cb, body: bb }) => {
            ca == cb && block_eq(ba, bb)
        }
        (ka, kb) => ka == kb,
    }
}

/// Structural equality: spans are ignored, statement ordinals and everything
/// else must match.
pub fn structurally_eq(a: &Ast, b: &Ast) -> bool {
    a.functions.len() == b.functions.len()
        && a.tests.len() == b.tests.len()
        && a.stmt_count == b.stmt_count
        && a.functions.iter().zip(&b.functions).all(|(x, y)| {
            x.name == y.name && x.params == y.params && block_eq(&x.body, &y.body)
        })
        && a.tests
            .iter()
            .zip(&b.tests)
            .all(|(x, y)| x.name == y.name && block_eq(&x.body, &y.body))
}

fn expr_diff(a: &Expr, b: &Expr) -> usize {
    if a == b {
        return 0;
    }
    // One tree wrapping the other whole (e.g. `e` vs `e + 1`) is a single
    // insertion.
    if b.children().iter().any(|c| *c == a) || a.children().iter().any(|c| *c == b) {
        return 1;
    }
    // Same shape: recurse; otherwise the whole subtree counts as one
    // substitution.
    let same_shape = match (a, b) {
        (Expr::Unary { op: oa, .. }, Expr::Unary { op: ob, .. }) => oa == ob,
        (Expr::Binary { op: oa, .. }, Expr::Binary { op: ob, .. }) => oa == ob,
        (Expr::Call { callee: ca, args: aa }, Expr::Call { callee: cb, args: ab }) => {
            ca == cb && aa.len() == ab.len()
        }
        _ => false,
    };
    if same_shape {
        a.children()
            .iter()
            .zip(b.children())
            .map(|(x, y)| expr_diff(x, y))
            .sum()
    } else {
        1
    }
}

fn stmt_exprs(s: &Stmt) -> Vec<&Expr> {
    match &s.kind {
        StmtKind::Let { value, .. }
        | StmtKind::Assign { value, .. }
        | StmtKind::Compound { value, .. } => vec![value],
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
        StmtKind::Return { value } => value.iter().collect(),
        StmtKind::Expr { expr } => vec![expr],
        StmtKind::Assert { cond, .. } => vec![cond],
        StmtKind::AssertEq { lhs, rhs, .. } => vec![lhs, rhs],
    }
}

/// Counts differing expression nodes between two structurally parallel
/// programs. A wholesale subtree replacement counts as one. Returns `None`
/// when the statement shapes themselves differ.
pub fn node_diff_count(a: &Ast, b: &Ast) -> Option<usize> {
    let sa = a.all_statements();
    let sb = b.all_statements();
    if sa.len() != sb.len() {
        return None;
    }
    let mut total = 0;
    for (x, y) in sa.iter().zip(&sb) {
        if std::mem::discriminant(&x.kind) != std::mem::discriminant(&y.kind) || x.id != y.id {
            return None;
        }
        // Compound operator flips count as a node change with identical
        // operand expressions.
        if let (StmtKind::Compound { op: oa, .. }, StmtKind::Compound { op: ob, .. }) =
            (&x.kind, &y.kind)
        {
            if oa != ob {
                total += 1;
            }
        }
        let ea = stmt_exprs(x);
        let eb = stmt_exprs(y);
        if ea.len() != eb.len() {
            return None;
        }
        for (p, q) in ea.iter().zip(&eb) {
            total += expr_diff(p, q);
        }
    }
    Some(total)
}
