//! Recursive-descent parser producing an [`Ast`] with dense pre-order
//! statement ordinals.

use super::ast::*;
use super::lexer::{lex, Token, TokenKind};
use super::{Diagnostic, ParseError};

pub fn parse(source: &str, file: &str) -> Result<Ast, ParseError> {
    let tokens = lex(source, file).map_err(|diags| ParseError { diags })?;
    let mut parser = Parser { tokens, pos: 0, next_ordinal: 0, diags: Vec::new() };
    let ast = parser.program();
    if parser.diags.is_empty() {
        Ok(ast)
    } else {
        Err(ParseError { diags: parser.diags })
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    next_ordinal: u32,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek2(&self) -> &TokenKind {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].kind
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn check(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.check(kind) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, ()> {
        if self.check(&kind) {
            Ok(self.advance())
        } else {
            self.error_here(format!(
                "expected {}, found {}",
                kind.describe(),
                self.peek().kind.describe()
            ));
            Err(())
        }
    }

    fn error_here(&mut self, message: String) {
        let span = self.peek().span.clone();
        self.diags.push(Diagnostic { message, span });
    }

    fn fresh_id(&mut self) -> StatementId {
        let id = StatementId(self.next_ordinal);
        self.next_ordinal += 1;
        id
    }

    fn ident(&mut self) -> Result<(String, SourceSpan), ()> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let span = self.peek().span.clone();
                self.advance();
                Ok((name, span))
            }
            other => {
                let msg = format!("expected identifier, found {}", other.describe());
                self.error_here(msg);
                Err(())
            }
        }
    }

    /// Skips to the next plausible top-level item after an error.
    fn sync_toplevel(&mut self) {
        while !self.check(&TokenKind::Eof)
            && !self.check(&TokenKind::Fn)
            && !self.check(&TokenKind::Test)
        {
            self.advance();
        }
    }

    fn program(&mut self) -> Ast {
        let mut functions = Vec::new();
        let mut tests: Vec<TestDef> = Vec::new();
        while !self.check(&TokenKind::Eof) {
            if self.check(&TokenKind::Fn) {
                if let Ok(f) = self.funcdef() {
                    if functions.iter().any(|g: &FuncDef| g.name == f.name) {
                        self.diags.push(Diagnostic {
                            message: format!("duplicate function name `{}`", f.name),
                            span: f.span.clone(),
                        });
                    }
                    functions.push(f);
                } else {
                    self.sync_toplevel();
                }
            } else if self.check(&TokenKind::Test) {
                if let Ok(t) = self.testdef() {
                    if tests.iter().any(|u| u.name == t.name) {
                        self.diags.push(Diagnostic {
                            message: format!("duplicate test name `{}`", t.name),
                            span: t.span.clone(),
                        });
                    }
                    tests.push(t);
                } else {
                    self.sync_toplevel();
                }
            } else {
                self.error_here(format!(
                    "expected `fn` or `test`, found {}",
                    self.peek().kind.describe()
                ));
                self.sync_toplevel();
            }
        }
        Ast { functions, tests, stmt_count: self.next_ordinal as usize }
    }

    fn funcdef(&mut self) -> Result<FuncDef, ()> {
        let kw = self.expect(TokenKind::Fn)?;
        let (name, _) = self.ident()?;
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if !self.check(&TokenKind::RParen) {
            loop {
                let (p, _) = self.ident()?;
                params.push(p);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        let body = self.block()?;
        Ok(FuncDef { name, params, body, span: kw.span })
    }

    fn testdef(&mut self) -> Result<TestDef, ()> {
        let kw = self.expect(TokenKind::Test)?;
        let (name, _) = self.ident()?;
        let body = self.block()?;
        Ok(TestDef { name, body, span: kw.span })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ()> {
        self.expect(TokenKind::LBrace)?;
        let mut stmts = Vec::new();
        while !self.check(&TokenKind::RBrace) {
            if self.check(&TokenKind::Eof) {
                self.error_here("unterminated block: expected `}`".to_string());
                return Err(());
            }
            stmts.push(self.stmt()?);
        }
        self.expect(TokenKind::RBrace)?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ()> {
        let span = self.peek().span.clone();
        // Ordinals are handed out in source order, which for a recursive
        // descent over blocks is exactly pre-order.
        let id = self.fresh_id();
        let kind = match self.peek().kind.clone() {
            TokenKind::Let => {
                self.advance();
                let (name, _) = self.ident()?;
                self.expect(TokenKind::Assign)?;
                let value = self.expr()?;
                self.expect(TokenKind::Semi)?;
                StmtKind::Let { name, value }
            }
            TokenKind::If => {
                self.advance();
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let then_block = self.block()?;
                let else_block =
                    if self.eat(&TokenKind::Else) { Some(self.block()?) } else { None };
                StmtKind::If { cond, then_block, else_block }
            }
            TokenKind::While => {
                self.advance();
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            TokenKind::Return => {
                self.advance();
                let value =
                    if self.check(&TokenKind::Semi) { None } else { Some(self.expr()?) };
                self.expect(TokenKind::Semi)?;
                StmtKind::Return { value }
            }
            TokenKind::Assert | TokenKind::SoftAssert => {
                let soft = matches!(self.peek().kind, TokenKind::SoftAssert);
                self.advance();
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Semi)?;
                StmtKind::Assert { soft, cond }
            }
            TokenKind::AssertEq | TokenKind::SoftAssertEq => {
                let soft = matches!(self.peek().kind, TokenKind::SoftAssertEq);
                self.advance();
                self.expect(TokenKind::LParen)?;
                let lhs = self.expr()?;
                self.expect(TokenKind::Comma)?;
                let rhs = self.expr()?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Semi)?;
                StmtKind::AssertEq { soft, lhs, rhs }
            }
            TokenKind::Ident(name) if matches!(self.peek2(), TokenKind::Assign) => {
                self.advance();
                self.advance();
                let value = self.expr()?;
                self.expect(TokenKind::Semi)?;
                StmtKind::Assign { name, value }
            }
            TokenKind::Ident(name)
                if matches!(self.peek2(), TokenKind::PlusAssign | TokenKind::MinusAssign) =>
            {
                self.advance();
                let op = if matches!(self.peek().kind, TokenKind::PlusAssign) {
                    CompoundOp::AddAssign
                } else {
                    CompoundOp::SubAssign
                };
                self.advance();
                let value = self.expr()?;
                self.expect(TokenKind::Semi)?;
                StmtKind::Compound { name, op, value }
            }
            _ => {
                let expr = self.expr()?;
                self.expect(TokenKind::Semi)?;
                StmtKind::Expr { expr }
            }
        };
        Ok(Stmt { id, span, kind })
    }

    fn expr(&mut self) -> Result<Expr, ()> {
        self.binary_expr(0)
    }

    fn binary_expr(&mut self, min_prec: u8) -> Result<Expr, ()> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::OrOr => BinOp::Or,
                TokenKind::AndAnd => BinOp::And,
                TokenKind::EqEq => BinOp::Eq,
                TokenKind::NotEq => BinOp::Ne,
                TokenKind::Lt => BinOp::Lt,
                TokenKind::Le => BinOp::Le,
                TokenKind::Gt => BinOp::Gt,
                TokenKind::Ge => BinOp::Ge,
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                TokenKind::Percent => BinOp::Rem,
                _ => break,
            };
            let prec = precedence(op);
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary_expr(prec + 1)?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, ()> {
        match self.peek().kind {
            TokenKind::Minus => {
                self.advance();
                let expr = self.unary_expr()?;
                Ok(Expr::Unary { op: UnaryOp::Neg, expr: Box::new(expr) })
            }
            TokenKind::Not => {
                self.advance();
                let expr = self.unary_expr()?;
                Ok(Expr::Unary { op: UnaryOp::Not, expr: Box::new(expr) })
            }
            _ => self.primary_expr(),
        }
    }

    fn primary_expr(&mut self) -> Result<Expr, ()> {
        match self.peek().kind.clone() {
            TokenKind::Number(n) => {
                self.advance();
                Ok(Expr::Number(n))
            }
            TokenKind::Nan => {
                self.advance();
                Ok(Expr::Number(f64::NAN))
            }
            TokenKind::True => {
                self.advance();
                Ok(Expr::Bool(true))
            }
            TokenKind::False => {
                self.advance();
                Ok(Expr::Bool(false))
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(Expr::Str(s))
            }
            TokenKind::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::Ident(name) => {
                self.advance();
                if self.eat(&TokenKind::LParen) {
                    let mut args = Vec::new();
                    if !self.check(&TokenKind::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&TokenKind::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(TokenKind::RParen)?;
                    Ok(Expr::Call { callee: name, args })
                } else {
                    Ok(Expr::Var(name))
                }
            }
            other => {
                let msg = format!("expected expression, found {}", other.describe());
                self.error_here(msg);
                Err(())
            }
        }
    }
}

/// Binding power; higher binds tighter. `||` < `&&` < comparisons <
/// additive < multiplicative.
pub fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
        BinOp::Add | BinOp::Sub => 4,
        BinOp::Mul | BinOp::Div | BinOp::Rem => 5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_function() {
        let ast = parse("fn id(x){ return x; }", "t.ml0").unwrap();
        assert_eq!(ast.functions.len(), 1);
        assert_eq!(ast.stmt_count, 1);
    }

    #[test]
    fn minimal_test() {
        let ast = parse("test t { assert(true); }", "t.ml0").unwrap();
        assert_eq!(ast.tests.len(), 1);
        assert_eq!(ast.tests[0].body.len(), 1);
        assert!(ast.tests[0].body[0].is_hard_assertion());
    }

    #[test]
    fn ordinals_are_dense_preorder() {
        let src = "fn f(a) { if (a > 0) { return a; } else { return -a; } return 0; }";
        let ast = parse(src, "t.ml0").unwrap();
        let ids: Vec<u32> =
            block_preorder(&ast.functions[0].body).iter().map(|s| s.id.0).collect();
        assert_eq!(ids, vec![0, 1, 2, 3]);
        assert_eq!(ast.stmt_count, 4);
    }

    #[test]
    fn reparse_is_stable() {
        let src = "fn f(a,b) { let c = a + b; return c; } test t { assert_eq(f(1,2), 3); }";
        let a = parse(src, "t.ml0").unwrap();
        let b = parse(src, "t.ml0").unwrap();
        assert!(structurally_eq(&a, &b));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        assert!(parse("fn f(){} fn f(){}", "t.ml0").is_err());
        assert!(parse("test t {} test t {}", "t.ml0").is_err());
    }

    #[test]
    fn syntax_error_has_span() {
        let err = parse("fn f( { }", "t.ml0").unwrap_err();
        assert!(!err.diags.is_empty());
        assert_eq!(err.diags[0].span.line, 1);
    }

    #[test]
    fn precedence_binds_mul_over_add() {
        let ast = parse("fn f() { return 1 + 2 * 3; }", "t.ml0").unwrap();
        match &ast.functions[0].body[0].kind {
            StmtKind::Return { value: Some(Expr::Binary { op: BinOp::Add, rhs, .. }) } => {
                assert!(matches!(**rhs, Expr::Binary { op: BinOp::Mul, .. }));
            }
            other => panic!("unexpected parse: {other:?}"),
        }
    }

    #[test]
    fn soft_assertion_forms_parse() {
        let ast = parse(
            "test t { soft_assert(true); soft_assert_eq(1, 2); }",
            "t.ml0",
        )
        .unwrap();
        assert!(matches!(ast.tests[0].body[0].kind, StmtKind::Assert { soft: true, .. }));
        assert!(matches!(ast.tests[0].body[1].kind, StmtKind::AssertEq { soft: true, .. }));
    }
}
