//! Deterministic tree-walking evaluator.
//!
//! Runs one test against a program, recording per-statement coverage, a
//! dynamic dependence trace (data via qualified variable names, control via
//! predicate events), and the test outcome with the failure-vs-error
//! distinction under a statement-event step budget.

use crate::frontend::*;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// Runtime value. Numbers are binary64; `assert_eq(nan, x)` always fails
/// because NaN compares unequal to everything under `==`.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Str(String),
    Unit,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "\"{s}\""),
            Value::Unit => write!(f, "unit"),
        }
    }
}

fn value_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        // IEEE semantics: NaN != NaN.
        (Value::Number(x), Value::Number(y)) => x == y,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Str(x), Value::Str(y)) => x == y,
        (Value::Unit, Value::Unit) => true,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestOutcome {
    Pass,
    /// An unsatisfied hard assertion; `broken` is always a hard-assertion
    /// statement.
    Failure { broken: StatementId, message: String },
    /// A runtime error; may originate at any statement.
    Error { broken: StatementId, message: String },
    /// Step budget exceeded.
    Timeout,
}

impl TestOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, TestOutcome::Pass)
    }

    pub fn is_failing(&self) -> bool {
        !self.is_pass()
    }

    /// The broken statement, when one exists (not for Pass/Timeout).
    pub fn broken(&self) -> Option<StatementId> {
        match self {
            TestOutcome::Failure { broken, .. } | TestOutcome::Error { broken, .. } => {
                Some(*broken)
            }
            _ => None,
        }
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            TestOutcome::Pass => "pass",
            TestOutcome::Failure { .. } => "failure",
            TestOutcome::Error { .. } => "error",
            TestOutcome::Timeout => "timeout",
        }
    }
}

/// One executed statement occurrence.
#[derive(Debug, Clone)]
pub struct TraceEvent {
    /// 0-based position in execution order.
    pub index: usize,
    pub stmt: StatementId,
    /// Qualified names written (`frame#n:x`; return values as `frame#n:$ret`).
    pub defs: BTreeSet<String>,
    /// Qualified names read.
    pub uses: BTreeSet<String>,
    /// Index of the controlling event: the most recent evaluation of the
    /// enclosing if/while predicate, or, for statements at the top level of a
    /// called function, the call event that entered the function.
    pub control_parent: Option<usize>,
    pub call_depth: usize,
}

#[derive(Debug, Clone)]
pub struct ExecutionTrace {
    pub events: Vec<TraceEvent>,
    /// Program (non-test) statements executed.
    pub coverage: BTreeSet<StatementId>,
    pub step_count: usize,
}

impl ExecutionTrace {
    /// Line-oriented dump: `idx<TAB>stmt<TAB>defs=..<TAB>uses=..<TAB>ctrl=..`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let defs: Vec<&str> = e.defs.iter().map(String::as_str).collect();
            let uses: Vec<&str> = e.uses.iter().map(String::as_str).collect();
            let ctrl = match e.control_parent {
                Some(i) => i.to_string(),
                None => "-".to_string(),
            };
            out.push_str(&format!(
                "{}\t{}\tdefs={}\tuses={}\tctrl={}\n",
                e.index,
                e.stmt.0,
                defs.join(","),
                uses.join(","),
                ctrl
            ));
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown test `{0}`")]
pub struct UnknownTest(pub String);

// Kept low enough that the interpreter's own (recursive) evaluation never
// exhausts the host stack, even in unoptimized builds.
const MAX_CALL_DEPTH: usize = 64;

enum Abort {
    Failure { stmt: StatementId, message: String },
    Error { stmt: StatementId, message: String },
    Timeout,
}

struct Frame {
    id: usize,
    vars: HashMap<String, Value>,
}

impl Frame {
    fn qualify(&self, name: &str) -> String {
        format!("frame#{}:{}", self.id, name)
    }
}

/// Per-statement evaluation context: accumulates the qualified names read
/// while the statement's expressions are evaluated.
struct StmtCtx {
    stmt: StatementId,
    uses: BTreeSet<String>,
    ctrl: Option<usize>,
}

struct Interp<'a> {
    program: &'a Ast,
    test_stmt_ids: BTreeSet<StatementId>,
    events: Vec<TraceEvent>,
    budget: usize,
    frames: Vec<Frame>,
    next_frame: usize,
    pub output: Vec<String>,
}

impl<'a> Interp<'a> {
    fn new(program: &'a Ast, budget: usize) -> Self {
        Interp {
            program,
            test_stmt_ids: program.test_statement_ids(),
            events: Vec::new(),
            budget,
            frames: Vec::new(),
            next_frame: 0,
            output: Vec::new(),
        }
    }

    fn frame(&self) -> &Frame {
        self.frames.last().expect("active frame")
    }

    fn frame_mut(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("active frame")
    }

    fn depth(&self) -> usize {
        self.frames.len() - 1
    }

    fn push_event(
        &mut self,
        stmt: StatementId,
        defs: BTreeSet<String>,
        uses: BTreeSet<String>,
        ctrl: Option<usize>,
    ) -> Result<usize, Abort> {
        let idx = self.push_event_unchecked(stmt, defs, uses, ctrl);
        if self.events.len() > self.budget {
            Err(Abort::Timeout)
        } else {
            Ok(idx)
        }
    }

    fn push_event_unchecked(
        &mut self,
        stmt: StatementId,
        defs: BTreeSet<String>,
        uses: BTreeSet<String>,
        ctrl: Option<usize>,
    ) -> usize {
        let index = self.events.len();
        let call_depth = self.depth();
        self.events.push(TraceEvent { index, stmt, defs, uses, control_parent: ctrl, call_depth });
        index
    }

    fn err(&self, ctx: &StmtCtx, message: String) -> Abort {
        Abort::Error { stmt: ctx.stmt, message }
    }

    fn eval(&mut self, expr: &Expr, ctx: &mut StmtCtx) -> Result<Value, Abort> {
        match expr {
            Expr::Number(n) => Ok(Value::Number(*n)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Str(s) => Ok(Value::Str(s.clone())),
            Expr::Var(name) => {
                let q = self.frame().qualify(name);
                match self.frame().vars.get(name) {
                    Some(v) => {
                        let v = v.clone();
                        ctx.uses.insert(q);
                        Ok(v)
                    }
                    None => Err(self.err(ctx, format!("undefined variable `{name}`"))),
                }
            }
            Expr::Unary { op, expr: inner } => {
                let v = self.eval(inner, ctx)?;
                match (op, v) {
                    (UnaryOp::Neg, Value::Number(n)) => Ok(Value::Number(-n)),
                    (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (op, v) => Err(self.err(
                        ctx,
                        format!("type mismatch: unary `{op:?}` applied to {v}"),
                    )),
                }
            }
            Expr::Binary { op, lhs, rhs } => self.eval_binary(*op, lhs, rhs, ctx),
            Expr::Call { callee, args } => self.eval_call(callee, args, ctx),
        }
    }

    fn eval_binary(
        &mut self,
        op: BinOp,
        lhs: &Expr,
        rhs: &Expr,
        ctx: &mut StmtCtx,
    ) -> Result<Value, Abort> {
        // Short-circuit forms evaluate the right side only when needed.
        if matches!(op, BinOp::And | BinOp::Or) {
            let l = self.eval(lhs, ctx)?;
            let l = match l {
                Value::Bool(b) => b,
                v => {
                    return Err(
                        self.err(ctx, format!("type mismatch: `{}` on {v}", op.symbol()))
                    )
                }
            };
            if (op == BinOp::And && !l) || (op == BinOp::Or && l) {
                return Ok(Value::Bool(l));
            }
            return match self.eval(rhs, ctx)? {
                Value::Bool(b) => Ok(Value::Bool(b)),
                v => Err(self.err(ctx, format!("type mismatch: `{}` on {v}", op.symbol()))),
            };
        }
        let l = self.eval(lhs, ctx)?;
        let r = self.eval(rhs, ctx)?;
        match op {
            BinOp::Eq => Ok(Value::Bool(value_eq(&l, &r))),
            BinOp::Ne => Ok(Value::Bool(!value_eq(&l, &r))),
            _ => {
                let (x, y) = match (&l, &r) {
                    (Value::Number(x), Value::Number(y)) => (*x, *y),
                    _ => {
                        return Err(self.err(
                            ctx,
                            format!("type mismatch: `{}` on {l} and {r}", op.symbol()),
                        ))
                    }
                };
                match op {
                    BinOp::Add => Ok(Value::Number(x + y)),
                    BinOp::Sub => Ok(Value::Number(x - y)),
                    BinOp::Mul => Ok(Value::Number(x * y)),
                    BinOp::Div => {
                        if y == 0.0 {
                            Err(self.err(ctx, "division by zero".to_string()))
                        } else {
                            Ok(Value::Number(x / y))
                        }
                    }
                    BinOp::Rem => {
                        if y == 0.0 {
                            Err(self.err(ctx, "remainder by zero".to_string()))
                        } else {
                            Ok(Value::Number(x % y))
                        }
                    }
                    BinOp::Lt => Ok(Value::Bool(x < y)),
                    BinOp::Le => Ok(Value::Bool(x <= y)),
                    BinOp::Gt => Ok(Value::Bool(x > y)),
                    BinOp::Ge => Ok(Value::Bool(x >= y)),
                    BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or => unreachable!(),
                }
            }
        }
    }

    fn eval_call(
        &mut self,
        callee: &str,
        args: &[Expr],
        ctx: &mut StmtCtx,
    ) -> Result<Value, Abort> {
        let mut arg_values = Vec::with_capacity(args.len());
        for arg in args {
            arg_values.push(self.eval(arg, ctx)?);
        }
        match callee {
            "is_nan" => {
                let [v] = self.builtin_args(callee, arg_values, ctx)?;
                match v {
                    Value::Number(n) => Ok(Value::Bool(n.is_nan())),
                    v => Err(self.err(ctx, format!("is_nan expects a number, got {v}"))),
                }
            }
            "abs" => {
                let [v] = self.builtin_args(callee, arg_values, ctx)?;
                match v {
                    Value::Number(n) => Ok(Value::Number(n.abs())),
                    v => Err(self.err(ctx, format!("abs expects a number, got {v}"))),
                }
            }
            "print" => {
                let [v] = self.builtin_args(callee, arg_values, ctx)?;
                self.output.push(v.to_string());
                Ok(Value::Unit)
            }
            _ => {
                let func = match self.program.function(callee) {
                    Some(f) => f,
                    None => return Err(self.err(ctx, format!("unknown function `{callee}`"))),
                };
                if func.params.len() != args.len() {
                    return Err(self.err(
                        ctx,
                        format!(
                            "wrong arity: `{callee}` expects {} arguments, got {}",
                            func.params.len(),
                            args.len()
                        ),
                    ));
                }
                if self.frames.len() >= MAX_CALL_DEPTH {
                    return Err(self.err(ctx, "call depth exceeded".to_string()));
                }
                let frame_id = self.next_frame + 1;
                self.next_frame += 1;
                let mut frame = Frame { id: frame_id, vars: HashMap::new() };
                let mut defs = BTreeSet::new();
                for (p, v) in func.params.iter().zip(arg_values) {
                    defs.insert(frame.qualify(p));
                    frame.vars.insert(p.clone(), v);
                }
                // Call event: binds the callee's parameters from the argument
                // reads collected so far; callee top-level statements hang off
                // it as their control parent.
                let entry =
                    self.push_event(ctx.stmt, defs, ctx.uses.clone(), ctx.ctrl)?;
                self.frames.push(frame);
                let result = self.exec_block(&func.body, Some(entry));
                let frame = self.frames.pop().expect("callee frame");
                let ret_q = frame.qualify("$ret");
                let value = result?.unwrap_or(Value::Unit);
                ctx.uses.insert(ret_q);
                Ok(value)
            }
        }
    }

    fn builtin_args<const N: usize>(
        &self,
        name: &str,
        args: Vec<Value>,
        ctx: &StmtCtx,
    ) -> Result<[Value; N], Abort> {
        let n = args.len();
        args.try_into().map_err(|_| Abort::Error {
            stmt: ctx.stmt,
            message: format!("wrong arity: `{name}` expects {N} arguments, got {n}"),
        })
    }

    /// Executes a block; `Ok(Some(v))` means a `return` unwound through it.
    fn exec_block(
        &mut self,
        block: &[Stmt],
        ctrl: Option<usize>,
    ) -> Result<Option<Value>, Abort> {
        for stmt in block {
            if let Some(v) = self.exec_stmt(stmt, ctrl)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    fn exec_stmt(&mut self, stmt: &Stmt, ctrl: Option<usize>) -> Result<Option<Value>, Abort> {
        let mut ctx = StmtCtx { stmt: stmt.id, uses: BTreeSet::new(), ctrl };
        match &stmt.kind {
            StmtKind::Let { name, value } => {
                let v = self.emitting(&mut ctx, |me, ctx| me.eval(value, ctx), |me| {
                    BTreeSet::from([me.frame().qualify(name)])
                })?;
                self.frame_mut().vars.insert(name.clone(), v);
                Ok(None)
            }
            StmtKind::Assign { name, value } => {
                // Reading the target first makes the declaring `let` a data
                // dependence of every reassignment.
                if !self.frame().vars.contains_key(name) {
                    let abort = self.err(&ctx, format!("assignment to undeclared `{name}`"));
                    self.push_event_unchecked(ctx.stmt, BTreeSet::new(), ctx.uses, ctx.ctrl);
                    return Err(abort);
                }
                ctx.uses.insert(self.frame().qualify(name));
                let v = self.emitting(&mut ctx, |me, ctx| me.eval(value, ctx), |me| {
                    BTreeSet::from([me.frame().qualify(name)])
                })?;
                self.frame_mut().vars.insert(name.clone(), v);
                Ok(None)
            }
            StmtKind::Compound { name, op, value } => {
                let q = self.frame().qualify(name);
                let current = match self.frame().vars.get(name) {
                    Some(Value::Number(n)) => *n,
                    Some(v) => {
                        let abort = self.err(
                            &ctx,
                            format!("type mismatch: `{}` on {v}", op.symbol()),
                        );
                        self.push_event_unchecked(ctx.stmt, BTreeSet::new(), ctx.uses, ctx.ctrl);
                        return Err(abort);
                    }
                    None => {
                        let abort =
                            self.err(&ctx, format!("compound assignment to undeclared `{name}`"));
                        self.push_event_unchecked(ctx.stmt, BTreeSet::new(), ctx.uses, ctx.ctrl);
                        return Err(abort);
                    }
                };
                ctx.uses.insert(q);
                let v = self.emitting(&mut ctx, |me, ctx| me.eval(value, ctx), |me| {
                    BTreeSet::from([me.frame().qualify(name)])
                })?;
                let rhs = match v {
                    Value::Number(n) => n,
                    v => {
                        return Err(Abort::Error {
                            stmt: stmt.id,
                            message: format!("type mismatch: `{}` on {v}", op.symbol()),
                        })
                    }
                };
                let result = match op {
                    CompoundOp::AddAssign => current + rhs,
                    CompoundOp::SubAssign => current - rhs,
                };
                self.frame_mut().vars.insert(name.clone(), Value::Number(result));
                Ok(None)
            }
            StmtKind::If { cond, then_block, else_block } => {
                let v = self.emitting(&mut ctx, |me, ctx| me.eval(cond, ctx), |_| {
                    BTreeSet::new()
                })?;
                let taken = match v {
                    Value::Bool(b) => b,
                    v => {
                        return Err(Abort::Error {
                            stmt: stmt.id,
                            message: format!("if condition must be a bool, got {v}"),
                        })
                    }
                };
                let pred = self.events.len() - 1;
                if taken {
                    self.exec_block(then_block, Some(pred))
                } else if let Some(eb) = else_block {
                    self.exec_block(eb, Some(pred))
                } else {
                    Ok(None)
                }
            }
            StmtKind::While { cond, body } => {
                loop {
                    let mut cond_ctx =
                        StmtCtx { stmt: stmt.id, uses: BTreeSet::new(), ctrl };
                    let v = self.emitting(&mut cond_ctx, |me, ctx| me.eval(cond, ctx), |_| {
                        BTreeSet::new()
                    })?;
                    let taken = match v {
                        Value::Bool(b) => b,
                        v => {
                            return Err(Abort::Error {
                                stmt: stmt.id,
                                message: format!("while condition must be a bool, got {v}"),
                            })
                        }
                    };
                    if !taken {
                        return Ok(None);
                    }
                    let pred = self.events.len() - 1;
                    if let Some(v) = self.exec_block(body, Some(pred))? {
                        return Ok(Some(v));
                    }
                }
            }
            StmtKind::Return { value } => {
                let v = match value {
                    Some(e) => {
                        Some(self.emitting(&mut ctx, |me, ctx| me.eval(e, ctx), |me| {
                            BTreeSet::from([me.frame().qualify("$ret")])
                        })?)
                    }
                    None => {
                        let defs = BTreeSet::from([self.frame().qualify("$ret")]);
                        self.push_event(stmt.id, defs, ctx.uses, ctrl)?;
                        None
                    }
                };
                Ok(Some(v.unwrap_or(Value::Unit)))
            }
            StmtKind::Expr { expr } => {
                self.emitting(&mut ctx, |me, ctx| me.eval(expr, ctx), |_| BTreeSet::new())?;
                Ok(None)
            }
            StmtKind::Assert { soft, cond } => {
                let result = self.eval(cond, &mut ctx);
                self.push_event_soft_aware(&ctx)?;
                match result {
                    Ok(Value::Bool(true)) => Ok(None),
                    Ok(Value::Bool(false)) => {
                        if *soft {
                            Ok(None)
                        } else {
                            Err(Abort::Failure {
                                stmt: stmt.id,
                                message: "assertion failed".to_string(),
                            })
                        }
                    }
                    Ok(v) => self.soft_or(
                        *soft,
                        Abort::Error {
                            stmt: stmt.id,
                            message: format!("assert expects a bool, got {v}"),
                        },
                    ),
                    Err(abort) => self.soft_or(*soft, abort),
                }
            }
            StmtKind::AssertEq { soft, lhs, rhs } => {
                let result = (|| {
                    let l = self.eval(lhs, &mut ctx)?;
                    let r = self.eval(rhs, &mut ctx)?;
                    Ok((l, r))
                })();
                self.push_event_soft_aware(&ctx)?;
                match result {
                    Ok((l, r)) => {
                        if value_eq(&l, &r) {
                            Ok(None)
                        } else if *soft {
                            Ok(None)
                        } else {
                            Err(Abort::Failure {
                                stmt: stmt.id,
                                message: format!("assert_eq failed: left={l}, right={r}"),
                            })
                        }
                    }
                    Err(abort) => self.soft_or(*soft, abort),
                }
            }
        }
    }

    /// Evaluates the statement's expression(s), then emits the statement
    /// event with the collected uses — also on error, so the broken statement
    /// always has a trace event.
    fn emitting<T>(
        &mut self,
        ctx: &mut StmtCtx,
        eval: impl FnOnce(&mut Self, &mut StmtCtx) -> Result<T, Abort>,
        defs: impl FnOnce(&Self) -> BTreeSet<String>,
    ) -> Result<T, Abort> {
        match eval(self, ctx) {
            Ok(v) => {
                let d = defs(self);
                self.push_event(ctx.stmt, d, std::mem::take(&mut ctx.uses), ctx.ctrl)?;
                Ok(v)
            }
            Err(abort) => {
                if !matches!(abort, Abort::Timeout) {
                    self.push_event_unchecked(
                        ctx.stmt,
                        BTreeSet::new(),
                        std::mem::take(&mut ctx.uses),
                        ctx.ctrl,
                    );
                }
                Err(abort)
            }
        }
    }

    /// Emits the assertion's event. Evaluation already happened; errors there
    /// are handled by the caller (soft assertions swallow them).
    fn push_event_soft_aware(&mut self, ctx: &StmtCtx) -> Result<(), Abort> {
        self.push_event(ctx.stmt, BTreeSet::new(), ctx.uses.clone(), ctx.ctrl)?;
        Ok(())
    }

    /// Soft assertions swallow failures and runtime errors raised while their
    /// expressions evaluate; a timeout always propagates.
    fn soft_or(&self, soft: bool, abort: Abort) -> Result<Option<Value>, Abort> {
        if soft && !matches!(abort, Abort::Timeout) {
            Ok(None)
        } else {
            Err(abort)
        }
    }

    fn finish(self, result: Result<Option<Value>, Abort>) -> (TestOutcome, ExecutionTrace) {
        let outcome = match result {
            Ok(_) => TestOutcome::Pass,
            Err(Abort::Failure { stmt, message }) => {
                TestOutcome::Failure { broken: stmt, message }
            }
            Err(Abort::Error { stmt, message }) => TestOutcome::Error { broken: stmt, message },
            Err(Abort::Timeout) => TestOutcome::Timeout,
        };
        let coverage = self
            .events
            .iter()
            .map(|e| e.stmt)
            .filter(|id| !self.test_stmt_ids.contains(id))
            .collect();
        let step_count = self.events.len();
        (outcome, ExecutionTrace { events: self.events, coverage, step_count })
    }
}

/// Runs one test from the program by name.
pub fn run_test(
    program: &Ast,
    test_name: &str,
    step_budget: usize,
) -> Result<(TestOutcome, ExecutionTrace), UnknownTest> {
    let test = program.test(test_name).ok_or_else(|| UnknownTest(test_name.to_string()))?;
    Ok(run_test_def(program, test, step_budget))
}

/// Runs a test definition (not necessarily one of the program's own tests —
/// purified tests reuse original statement ids) against the program.
pub fn run_test_def(
    program: &Ast,
    test: &TestDef,
    step_budget: usize,
) -> (TestOutcome, ExecutionTrace) {
    assert!(step_budget > 0, "step budget must be positive");
    let mut interp = Interp::new(program, step_budget);
    interp.frames.push(Frame { id: 0, vars: HashMap::new() });
    let result = interp.exec_block(&test.body, None);
    interp.finish(result)
}

/// Runs every test independently with a fresh state each.
pub fn run_suite(
    program: &Ast,
    step_budget: usize,
) -> BTreeMap<String, (TestOutcome, ExecutionTrace)> {
    program
        .tests
        .iter()
        .map(|t| (t.name.clone(), run_test_def(program, t, step_budget)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    const BUDGET: usize = 100_000;

    fn run(src: &str, name: &str) -> (TestOutcome, ExecutionTrace) {
        let ast = parse(src, "t.ml0").unwrap();
        run_test(&ast, name, BUDGET).unwrap()
    }

    #[test]
    fn tautological_assertion_passes() {
        let (outcome, trace) = run("test t { assert(true); }", "t");
        assert_eq!(outcome, TestOutcome::Pass);
        assert_eq!(trace.events.len(), 1);
        assert!(trace.coverage.is_empty());
    }

    #[test]
    fn unknown_test_is_a_usage_error() {
        let ast = parse("test t { assert(true); }", "t.ml0").unwrap();
        assert!(run_test(&ast, "nope", BUDGET).is_err());
    }

    #[test]
    fn hard_assertion_failure_reports_broken_statement() {
        let (outcome, _) = run("test t { let a = 1; assert_eq(a, 2); }", "t");
        match outcome {
            TestOutcome::Failure { broken, .. } => assert_eq!(broken, StatementId(1)),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn soft_assertion_failure_is_swallowed() {
        let (outcome, _) =
            run("test t { soft_assert(false); assert(true); }", "t");
        assert_eq!(outcome, TestOutcome::Pass);
    }

    #[test]
    fn soft_assertion_swallows_errors_in_its_expressions() {
        let (outcome, _) = run("test t { soft_assert_eq(1 / 0, 1); assert(true); }", "t");
        assert_eq!(outcome, TestOutcome::Pass);
    }

    #[test]
    fn failure_continues_past_soft_to_later_hard_assertion() {
        let src = "test t { let a = 1; soft_assert_eq(a, 2); assert_eq(a, 3); }";
        let (outcome, _) = run(src, "t");
        match outcome {
            TestOutcome::Failure { broken, .. } => assert_eq!(broken, StatementId(2)),
            other => panic!("expected failure at the hard assertion, got {other:?}"),
        }
    }

    #[test]
    fn runtime_error_aborts_with_broken_statement() {
        let (outcome, trace) = run("test t { let a = 1 / 0; assert(true); }", "t");
        match outcome {
            TestOutcome::Error { broken, .. } => assert_eq!(broken, StatementId(0)),
            other => panic!("expected error, got {other:?}"),
        }
        // The broken statement still has a trace event.
        assert!(trace.events.iter().any(|e| e.stmt == StatementId(0)));
    }

    #[test]
    fn assert_eq_nan_always_fails() {
        let (outcome, _) = run("test t { assert_eq(nan, nan); }", "t");
        assert!(matches!(outcome, TestOutcome::Failure { .. }));
    }

    #[test]
    fn unbounded_loop_times_out() {
        let ast = parse("test t { while (true) { let x = 1; } }", "t.ml0").unwrap();
        let (outcome, trace) = run_test(&ast, "t", 50).unwrap();
        assert_eq!(outcome, TestOutcome::Timeout);
        assert!(trace.step_count >= 50);
    }

    #[test]
    fn coverage_spans_called_functions_only() {
        let src = "fn double(x) { return x + x; } test t { assert_eq(double(2), 4); }";
        let ast = parse(src, "t.ml0").unwrap();
        let (outcome, trace) = run_test(&ast, "t", BUDGET).unwrap();
        assert_eq!(outcome, TestOutcome::Pass);
        assert_eq!(trace.coverage, BTreeSet::from([StatementId(0)]));
    }

    #[test]
    fn trace_links_data_through_calls() {
        let src = "fn inc(x) { return x + 1; } test t { let a = 1; let b = inc(a); assert_eq(b, 2); }";
        let ast = parse(src, "t.ml0").unwrap();
        let (_, trace) = run_test(&ast, "t", BUDGET).unwrap();
        // The call event binds frame#1:x and uses frame#0:a.
        let call = trace
            .events
            .iter()
            .find(|e| e.defs.contains("frame#1:x"))
            .expect("call event");
        assert!(call.uses.contains("frame#0:a"));
        // The return statement defines frame#1:$ret under the call's control.
        let ret = trace
            .events
            .iter()
            .find(|e| e.defs.contains("frame#1:$ret"))
            .expect("return event");
        assert_eq!(ret.control_parent, Some(call.index));
        // The let consuming the call uses the return value.
        let let_b = trace
            .events
            .iter()
            .find(|e| e.defs.contains("frame#0:b"))
            .expect("let b event");
        assert!(let_b.uses.contains("frame#1:$ret"));
    }

    #[test]
    fn control_parent_points_at_predicate_event() {
        let src = "test t { let a = 1; if (a > 0) { let b = 2; } assert(true); }";
        let ast = parse(src, "t.ml0").unwrap();
        let (_, trace) = run_test(&ast, "t", BUDGET).unwrap();
        let pred = trace.events.iter().find(|e| e.stmt == StatementId(1)).unwrap();
        let body = trace.events.iter().find(|e| e.defs.contains("frame#0:b")).unwrap();
        assert_eq!(body.control_parent, Some(pred.index));
        assert!(pred.index < body.index);
    }

    #[test]
    fn determinism_and_budget_monotonicity() {
        let src = "fn f(n) { let s = 0; let i = 0; while (i < n) { s += i; i += 1; } return s; }\n\
                   test t { assert_eq(f(5), 10); }";
        let ast = parse(src, "t.ml0").unwrap();
        let (o1, t1) = run_test(&ast, "t", BUDGET).unwrap();
        let (o2, t2) = run_test(&ast, "t", BUDGET).unwrap();
        assert_eq!(o1, o2);
        assert_eq!(t1.dump(), t2.dump());
        // Passing with budget b implies identical run with any larger budget.
        let exact = t1.step_count;
        let (o3, t3) = run_test(&ast, "t", exact).unwrap();
        assert_eq!(o3, TestOutcome::Pass);
        assert_eq!(t3.dump(), t1.dump());
    }

    #[test]
    fn soft_form_preserves_prefix_coverage() {
        let hard = "fn f(x) { return x + 1; } test t { let a = f(1); assert_eq(a, 99); let b = f(a); assert(true); }";
        let soft = "fn f(x) { return x + 1; } test t { let a = f(1); soft_assert_eq(a, 99); let b = f(a); assert(true); }";
        let (oh, th) = run(hard, "t");
        let (os, ts) = run(soft, "t");
        assert!(matches!(oh, TestOutcome::Failure { .. }));
        assert_eq!(os, TestOutcome::Pass);
        // Events before the assertion are identical in both runs.
        let cut = th.events.len();
        let prefix_h: Vec<u32> = th.events.iter().map(|e| e.stmt.0).collect();
        let prefix_s: Vec<u32> = ts.events.iter().take(cut).map(|e| e.stmt.0).collect();
        assert_eq!(prefix_h, prefix_s);
    }

    #[test]
    fn fresh_state_per_test() {
        let src = "test a { let x = 1; assert_eq(x, 1); } test b { assert_eq(x, 1); }";
        let ast = parse(src, "t.ml0").unwrap();
        let results = run_suite(&ast, BUDGET);
        assert!(results["a"].0.is_pass());
        assert!(matches!(results["b"].0, TestOutcome::Error { .. }));
    }

    #[test]
    fn wrong_arity_and_unknown_function_error() {
        assert!(matches!(
            run("fn f(a) { return a; } test t { f(); }", "t").0,
            TestOutcome::Error { .. }
        ));
        assert!(matches!(
            run("test t { g(1); }", "t").0,
            TestOutcome::Error { .. }
        ));
    }

    #[test]
    fn recursion_is_bounded_by_depth_cap() {
        let src = "fn f(n) { return f(n + 1); } test t { f(0); }";
        let (outcome, _) = run(src, "t");
        assert!(matches!(outcome, TestOutcome::Error { .. } | TestOutcome::Timeout));
    }
}
