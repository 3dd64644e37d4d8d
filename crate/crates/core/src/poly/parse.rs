//! Infix polynomial expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := ('+' | '-') factor | power
//! power   := primary ('^' int)?
//! primary := number | var | '(' expr ')'
//! ```
//!
//! Numbers are plain decimals (`12`, `0.5`, `.25`). Variable names start with
//! a letter or `_` and may continue with letters, digits, `_` and primes
//! (`'` or `′`). Products need an explicit `*`; whitespace is insignificant.

use std::fmt;

use thiserror::Error;

use super::{Polynomial, VarEnv};

/// Parse failure with a 1-based character column.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("column {column}: {kind}")]
pub struct ParseError {
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnknownVariable(String),
    NegativeExponent,
    NonIntegerExponent(String),
    Unexpected(String),
    UnexpectedEnd,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnknownVariable(v) => write!(f, "unknown variable `{v}`"),
            Self::NegativeExponent => f.write_str("negative exponent"),
            Self::NonIntegerExponent(t) => write!(f, "exponent `{t}` is not a non-negative integer"),
            Self::Unexpected(t) => write!(f, "unexpected `{t}`"),
            Self::UnexpectedEnd => f.write_str("unexpected end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num(s) | Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '′'
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((t, column));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            if s == "." {
                return Err(ParseError {
                    column,
                    kind: ParseErrorKind::Unexpected(s),
                });
            }
            toks.push((Tok::Num(s), column));
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_continue(chars[i]) {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), column));
        } else {
            return Err(ParseError {
                column,
                kind: ParseErrorKind::Unexpected(c.to_string()),
            });
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_column: usize,
    env: &'a VarEnv,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |(_, c)| *c)
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError {
            column: self.column(),
            kind,
        })
    }

    fn unexpected<T>(&self) -> Result<T, ParseError> {
        match self.peek() {
            Some(t) => self.err(ParseErrorKind::Unexpected(t.text())),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-&self.factor()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.primary()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(s)) => {
                    let e: u32 = match s.parse() {
                        Ok(e) => e,
                        Err(_) => return self.err(ParseErrorKind::NonIntegerExponent(s)),
                    };
                    self.pos += 1;
                    Ok(base.pow(e))
                }
                Some(Tok::Minus) => self.err(ParseErrorKind::NegativeExponent),
                _ => self.unexpected(),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                let v: f64 = match s.parse() {
                    Ok(v) => v,
                    Err(_) => return self.err(ParseErrorKind::Unexpected(s)),
                };
                self.pos += 1;
                Ok(Polynomial::constant(self.env, v))
            }
            Some(Tok::Ident(name)) => match self.env.index_of(&name) {
                Some(i) => {
                    self.pos += 1;
                    Ok(Polynomial::var_at(self.env, i))
                }
                None => self.err(ParseErrorKind::UnknownVariable(name)),
            },
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.unexpected(),
                }
            }
            _ => self.unexpected(),
        }
    }
}

/// Parses an infix expression into a canonical polynomial over `env`.
pub fn parse_poly(text: &str, env: &VarEnv) -> Result<Polynomial, ParseError> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end_column: text.chars().count() + 1,
        env,
    };
    let p = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return parser.unexpected();
    }
    Ok(p)
}
