//! Recursive-descent parser for the field-expression grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := ['-'] base ('^' integer)?
//! base   := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp' | 'log'
//! ```
//!
//! Whitespace is insignificant. The leading `-` in `factor` is a convenience
//! superset of the published grammar so streams like `-x*y + sin(y)` parse
//! directly; printed expressions re-parse to a structurally equal tree.

use std::sync::Arc;

use super::{Expr, ScalarFieldExpr, Var};
use crate::error::Error;

pub fn parse_expression(text: &str) -> Result<ScalarFieldExpr, Error> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    if p.pos < p.tokens.len() {
        let t = &p.tokens[p.pos];
        return Err(Error::Parse {
            pos: t.pos,
            msg: format!("unexpected trailing token `{}`", t.kind.describe()),
        });
    }
    Ok(ScalarFieldExpr::from_arc(e))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    X,
    Y,
    Pi,
    Func(Func),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("{v}"),
            Tok::X => "x".into(),
            Tok::Y => "y".into(),
            Tok::Pi => "pi".into(),
            Tok::Func(f) => format!("{f:?}").to_lowercase(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, Error> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token { kind: Tok::Plus, pos: i });
                i += 1;
            }
            '-' => {
                out.push(Token { kind: Tok::Minus, pos: i });
                i += 1;
            }
            '*' => {
                out.push(Token { kind: Tok::Star, pos: i });
                i += 1;
            }
            '/' => {
                out.push(Token { kind: Tok::Slash, pos: i });
                i += 1;
            }
            '^' => {
                out.push(Token { kind: Tok::Caret, pos: i });
                i += 1;
            }
            '(' => {
                out.push(Token { kind: Tok::LParen, pos: i });
                i += 1;
            }
            ')' => {
                out.push(Token { kind: Tok::RParen, pos: i });
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent part of a float literal, e.g. 1.5e-3
                if i < bytes.len()
                    && matches!(bytes[i] as char, 'e' | 'E')
                    && i + 1 < bytes.len()
                    && matches!(bytes[i + 1] as char, '0'..='9' | '+' | '-')
                {
                    i += 2;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| Error::Parse {
                    pos: start,
                    msg: format!("invalid number literal `{s}`"),
                })?;
                out.push(Token { kind: Tok::Num(v), pos: start });
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                let word = &text[start..i];
                let kind = match word {
                    "x" => Tok::X,
                    "y" => Tok::Y,
                    "pi" => Tok::Pi,
                    "sin" => Tok::Func(Func::Sin),
                    "cos" => Tok::Func(Func::Cos),
                    "exp" => Tok::Func(Func::Exp),
                    "log" => Tok::Func(Func::Log),
                    other => {
                        return Err(Error::Parse {
                            pos: start,
                            msg: format!("unknown identifier `{other}`"),
                        })
                    }
                };
                out.push(Token { kind, pos: start });
            }
            other => {
                return Err(Error::Parse {
                    pos: i,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.pos)
            .unwrap_or_else(|| self.tokens.last().map(|t| t.pos + 1).unwrap_or(0))
    }

    fn expr(&mut self) -> Result<Arc<Expr>, Error> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Arc::new(Expr::Add(lhs, rhs));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Arc::new(Expr::Sub(lhs, rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Arc<Expr>, Error> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Arc::new(Expr::Mul(lhs, rhs));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Arc::new(Expr::Div(lhs, rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Arc<Expr>, Error> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.factor()?;
            return Ok(Arc::new(Expr::Neg(inner)));
        }
        let mut base = self.base()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let n = self.integer_exponent()?;
            base = Arc::new(Expr::Pow(base, n));
        }
        Ok(base)
    }

    fn integer_exponent(&mut self) -> Result<i32, Error> {
        let mut sign = 1i32;
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            sign = -1;
        }
        let at = self.here();
        match self.bump().map(|t| t.kind) {
            Some(Tok::Num(v)) => {
                if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
                    Err(Error::Parse {
                        pos: at,
                        msg: format!("exponent must be an integer, got `{v}`"),
                    })
                } else {
                    Ok(sign * v as i32)
                }
            }
            _ => Err(Error::Parse {
                pos: at,
                msg: "expected an integer exponent after `^`".into(),
            }),
        }
    }

    fn base(&mut self) -> Result<Arc<Expr>, Error> {
        let at = self.here();
        match self.bump().map(|t| t.kind) {
            Some(Tok::Num(v)) => Ok(Arc::new(Expr::Const(v))),
            Some(Tok::X) => Ok(Arc::new(Expr::Var(Var::X))),
            Some(Tok::Y) => Ok(Arc::new(Expr::Var(Var::Y))),
            Some(Tok::Pi) => Ok(Arc::new(Expr::Pi)),
            Some(Tok::Func(f)) => {
                let at = self.here();
                match self.bump().map(|t| t.kind) {
                    Some(Tok::LParen) => {}
                    _ => {
                        return Err(Error::Parse {
                            pos: at,
                            msg: "expected `(` after function name".into(),
                        })
                    }
                }
                let arg = self.expr()?;
                let at = self.here();
                match self.bump().map(|t| t.kind) {
                    Some(Tok::RParen) => {}
                    _ => {
                        return Err(Error::Parse {
                            pos: at,
                            msg: "expected `)` to close function argument".into(),
                        })
                    }
                }
                Ok(Arc::new(match f {
                    Func::Sin => Expr::Sin(arg),
                    Func::Cos => Expr::Cos(arg),
                    Func::Exp => Expr::Exp(arg),
                    Func::Log => Expr::Log(arg),
                }))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                let at = self.here();
                match self.bump().map(|t| t.kind) {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Parse {
                        pos: at,
                        msg: "expected `)`".into(),
                    }),
                }
            }
            Some(other) => Err(Error::Parse {
                pos: at,
                msg: format!("unexpected token `{}`", other.describe()),
            }),
            None => Err(Error::Parse {
                pos: at,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}
