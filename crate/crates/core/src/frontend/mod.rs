//! Lexing, parsing, and canonical printing of MiniLang source.
//!
//! Grammar sketch (whitespace-insensitive, `//` line comments):
//!
//! ```text
//! program  := (funcdef | testdef)*
//! funcdef  := "fn" IDENT "(" [IDENT ("," IDENT)*] ")" block
//! testdef  := "test" IDENT block
//! block    := "{" stmt* "}"
//! stmt     := "let" IDENT "=" expr ";"          | IDENT "=" expr ";"
//!           | IDENT ("+="|"-=") expr ";"        | "if" "(" expr ")" block ["else" block]
//!           | "while" "(" expr ")" block        | "return" [expr] ";"
//!           | "assert" "(" expr ")" ";"         | "assert_eq" "(" expr "," expr ")" ";"
//!           | "soft_assert" "(" expr ")" ";"    | "soft_assert_eq" "(" expr "," expr ")" ";"
//!           | expr ";"
//! ```
//!
//! Builtins: `is_nan(x)`, `abs(x)`, `print(x)`. File extension `.ml0`.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use ast::*;
pub use parser::parse;
pub use printer::{print, print_test};

use std::fmt;

/// A single syntax (or name-clash) diagnostic with its source position.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub message: String,
    pub span: ast::SourceSpan,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{}", diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ParseError {
    pub diags: Vec<Diagnostic>,
}
