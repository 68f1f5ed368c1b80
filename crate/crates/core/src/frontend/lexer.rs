//! Hand-written lexer for MiniLang. Whitespace-insensitive, `//` line
//! comments.

use super::ast::SourceSpan;
use super::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Str(String),
    // keywords
    Fn,
    Test,
    Let,
    If,
    Else,
    While,
    Return,
    Assert,
    AssertEq,
    SoftAssert,
    SoftAssertEq,
    True,
    False,
    Nan,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Assign,
    PlusAssign,
    MinusAssign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    NotEq,
    Not,
    AndAnd,
    OrOr,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Number(n) => format!("number `{n}`"),
            TokenKind::Str(_) => "string literal".to_string(),
            TokenKind::Eof => "end of input".to_string(),
            other => format!("`{}`", other.literal()),
        }
    }

    fn literal(&self) -> &'static str {
        match self {
            TokenKind::Fn => "fn",
            TokenKind::Test => "test",
            TokenKind::Let => "let",
            TokenKind::If => "if",
            TokenKind::Else => "else",
            TokenKind::While => "while",
            TokenKind::Return => "return",
            TokenKind::Assert => "assert",
            TokenKind::AssertEq => "assert_eq",
            TokenKind::SoftAssert => "soft_assert",
            TokenKind::SoftAssertEq => "soft_assert_eq",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::Nan => "nan",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Comma => ",",
            TokenKind::Semi => ";",
            TokenKind::Assign => "=",
            TokenKind::PlusAssign => "+=",
            TokenKind::MinusAssign => "-=",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Percent => "%",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::EqEq => "==",
            TokenKind::NotEq => "!=",
            TokenKind::Not => "!",
            TokenKind::AndAnd => "&&",
            TokenKind::OrOr => "||",
            _ => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

pub fn lex(source: &str, file: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! span {
        ($len:expr) => {
            SourceSpan::new(file, line, col, $len as u32)
        };
    }

    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '/' if i + 1 < chars.len() && chars[i + 1] == '/' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '"' => {
                let start_col = col;
                let mut j = i + 1;
                let mut s = String::new();
                let mut terminated = false;
                while j < chars.len() {
                    if chars[j] == '"' {
                        terminated = true;
                        break;
                    }
                    if chars[j] == '\n' {
                        break;
                    }
                    s.push(chars[j]);
                    j += 1;
                }
                let len = j + 1 - i;
                if terminated {
                    tokens.push(Token {
                        kind: TokenKind::Str(s),
                        span: SourceSpan::new(file, line, start_col, len as u32),
                    });
                    col += len as u32;
                    i = j + 1;
                } else {
                    diags.push(Diagnostic {
                        message: "unterminated string literal".to_string(),
                        span: SourceSpan::new(file, line, start_col, 1),
                    });
                    i = j;
                    col += (j - i) as u32;
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len()
                    && chars[i] == '.'
                    && i + 1 < chars.len()
                    && chars[i + 1].is_ascii_digit()
                {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let len = i - start;
                match text.parse::<f64>() {
                    Ok(n) => tokens.push(Token { kind: TokenKind::Number(n), span: span!(len) }),
                    Err(_) => diags.push(Diagnostic {
                        message: format!("invalid number literal `{text}`"),
                        span: span!(len),
                    }),
                }
                col += len as u32;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let len = i - start;
                let kind = match text.as_str() {
                    "fn" => TokenKind::Fn,
                    "test" => TokenKind::Test,
                    "let" => TokenKind::Let,
                    "if" => TokenKind::If,
                    "else" => TokenKind::Else,
                    "while" => TokenKind::While,
                    "return" => TokenKind::Return,
                    "assert" => TokenKind::Assert,
                    "assert_eq" => TokenKind::AssertEq,
                    "soft_assert" => TokenKind::SoftAssert,
                    "soft_assert_eq" => TokenKind::SoftAssertEq,
                    "true" => TokenKind::True,
                    "false" => TokenKind::False,
                    "nan" => TokenKind::Nan,
                    _ => TokenKind::Ident(text),
                };
                tokens.push(Token { kind, span: span!(len) });
                col += len as u32;
            }
            _ => {
                let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
                let (kind, len) = match two.as_str() {
                    "+=" => (Some(TokenKind::PlusAssign), 2),
                    "-=" => (Some(TokenKind::MinusAssign), 2),
                    "<=" => (Some(TokenKind::Le), 2),
                    ">=" => (Some(TokenKind::Ge), 2),
                    "==" => (Some(TokenKind::EqEq), 2),
                    "!=" => (Some(TokenKind::NotEq), 2),
                    "&&" => (Some(TokenKind::AndAnd), 2),
                    "||" => (Some(TokenKind::OrOr), 2),
                    _ => {
                        let k = match c {
                            '(' => Some(TokenKind::LParen),
                            ')' => Some(TokenKind::RParen),
                            '{' => Some(TokenKind::LBrace),
                            '}' => Some(TokenKind::RBrace),
                            ',' => Some(TokenKind::Comma),
                            ';' => Some(TokenKind::Semi),
                            '=' => Some(TokenKind::Assign),
                            '+' => Some(TokenKind::Plus),
                            '-' => Some(TokenKind::Minus),
                            '*' => Some(TokenKind::Star),
                            '/' => Some(TokenKind::Slash),
                            '%' => Some(TokenKind::Percent),
                            '<' => Some(TokenKind::Lt),
                            '>' => Some(TokenKind::Gt),
                            '!' => Some(TokenKind::Not),
                            _ => None,
                        };
                        (k, 1)
                    }
                };
                match kind {
                    Some(k) => {
                        tokens.push(Token { kind: k, span: span!(len) });
                    }
                    None => diags.push(Diagnostic {
                        message: format!("unexpected character `{c}`"),
                        span: span!(1),
                    }),
                }
                i += len;
                col += len as u32;
            }
        }
    }
    tokens.push(Token { kind: TokenKind::Eof, span: span!(0) });
    if diags.is_empty() {
        Ok(tokens)
    } else {
        Err(diags)
    }
}
