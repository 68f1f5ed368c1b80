//! Canonical source printer. `parse(print(a))` is structurally equal to `a`
//! and preserves statement ordinals.

use super::ast::*;
use super::parser::precedence;
use std::fmt::Write;

pub fn print(ast: &Ast) -> String {
    let mut out = String::new();
    let mut first = true;
    for f in &ast.functions {
        if !first {
            out.push('\n');
        }
        first = false;
        let _ = writeln!(out, "fn {}({}) {{", f.name, f.params.join(", "));
        print_block(&mut out, &f.body, 1);
        out.push_str("}\n");
    }
    for t in &ast.tests {
        if !first {
            out.push('\n');
        }
        first = false;
        let _ = writeln!(out, "test {} {{", t.name);
        print_block(&mut out, &t.body, 1);
        out.push_str("}\n");
    }
    out
}

pub fn print_test(test: &TestDef) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "test {} {{", test.name);
    print_block(&mut out, &test.body, 1);
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_block(out: &mut String, block: &[Stmt], level: usize) {
    for stmt in block {
        print_stmt(out, stmt, level);
    }
}

fn print_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    indent(out, level);
    match &stmt.kind {
        StmtKind::Let { name, value } => {
            let _ = writeln!(out, "let {} = {};", name, expr_str(value));
        }
        StmtKind::Assign { name, value } => {
            let _ = writeln!(out, "{} = {};", name, expr_str(value));
        }
        StmtKind::Compound { name, op, value } => {
            let _ = writeln!(out, "{} {} {};", name, op.symbol(), expr_str(value));
        }
        StmtKind::If { cond, then_block, else_block } => {
            let _ = writeln!(out, "if ({}) {{", expr_str(cond));
            print_block(out, then_block, level + 1);
            indent(out, level);
            match else_block {
                Some(eb) => {
                    out.push_str("} else {\n");
                    print_block(out, eb, level + 1);
                    indent(out, level);
                    out.push_str("}\n");
                }
                None => out.push_str("}\n"),
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while ({}) {{", expr_str(cond));
            print_block(out, body, level + 1);
            indent(out, level);
            out.push_str("}\n");
        }
        StmtKind::Return { value } => match value {
            Some(v) => {
                let _ = writeln!(out, "return {};", expr_str(v));
            }
            None => out.push_str("return;\n"),
        },
        StmtKind::Expr { expr } => {
            let _ = writeln!(out, "{};", expr_str(expr));
        }
        StmtKind::Assert { soft, cond } => {
            let kw = if *soft { "soft_assert" } else { "assert" };
            let _ = writeln!(out, "{}({});", kw, expr_str(cond));
        }
        StmtKind::AssertEq { soft, lhs, rhs } => {
            let kw = if *soft { "soft_assert_eq" } else { "assert_eq" };
            let _ = writeln!(out, "{}({}, {});", kw, expr_str(lhs), expr_str(rhs));
        }
    }
}

pub fn expr_str(expr: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, expr, 0, false);
    s
}

fn number_str(n: f64) -> String {
    if n.is_nan() {
        "nan".to_string()
    } else {
        // Display for f64 is the shortest decimal form that round-trips.
        format!("{n}")
    }
}

/// `min_prec` is the binding power required by the context; `right` marks the
/// right operand of a left-associative operator of equal precedence.
fn write_expr(out: &mut String, expr: &Expr, min_prec: u8, right: bool) {
    match expr {
        Expr::Number(n) => out.push_str(&number_str(*n)),
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Str(s) => {
            out.push('"');
            out.push_str(s);
            out.push('"');
        }
        Expr::Var(name) => out.push_str(name),
        Expr::Unary { op, expr: inner } => {
            out.push(match op {
                UnaryOp::Neg => '-',
                UnaryOp::Not => '!',
            });
            // Unary binds tighter than any binary operator.
            let needs_parens = matches!(**inner, Expr::Binary { .. });
            if needs_parens {
                out.push('(');
                write_expr(out, inner, 0, false);
                out.push(')');
            } else {
                write_expr(out, inner, 0, false);
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let prec = precedence(*op);
            let needs_parens = prec < min_prec || (prec == min_prec && right);
            if needs_parens {
                out.push('(');
            }
            write_expr(out, lhs, prec, false);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, rhs, prec, true);
            if needs_parens {
                out.push(')');
            }
        }
        Expr::Call { callee, args } => {
            out.push_str(callee);
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, arg, 0, false);
            }
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn roundtrip(src: &str) {
        let a = parse(src, "t.ml0").unwrap();
        let printed = print(&a);
        let b = parse(&printed, "t.ml0")
            .unwrap_or_else(|e| panic!("reparse failed for:\n{printed}\n{e:?}"));
        assert!(structurally_eq(&a, &b), "round-trip mismatch:\n{printed}");
        // Printing is canonical: a second round is a fixpoint.
        assert_eq!(printed, print(&b));
    }

    #[test]
    fn roundtrip_minimal() {
        roundtrip("fn id(x){ return x; }");
    }

    #[test]
    fn roundtrip_precedence() {
        roundtrip("fn f(a,b) { return (a + b) * 2 - a / (b - 1); }");
        roundtrip("fn g(a) { return a - (1 - a) - 1; }");
        roundtrip("fn h(a,b) { return !(a < b) && (a == b || b > 0); }");
        roundtrip("fn n(a) { return -(a + 1) + -a; }");
    }

    #[test]
    fn roundtrip_statements() {
        roundtrip(
            "fn f(a) { let x = 0; while (x < a) { x += 1; } if (x > 2) { x -= 1; } else { x = 0; } return x; }\n\
             test t { let y = f(3); soft_assert(y > 0); assert_eq(y, 2); print(\"done\"); }",
        );
    }

    #[test]
    fn soft_assertion_prints_with_prefix() {
        let ast = parse("test t { soft_assert_eq(1, 2); }", "t.ml0").unwrap();
        assert!(print(&ast).contains("soft_assert_eq(1, 2);"));
    }

    #[test]
    fn nan_literal_roundtrips() {
        roundtrip("test t { assert(is_nan(nan)); }");
        let ast = parse("fn f() { return nan; }", "t.ml0").unwrap();
        assert!(print(&ast).contains("return nan;"));
    }
}
