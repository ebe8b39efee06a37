//! Parser for the expression grammar.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' integer)?
//! base   := number | 'i' | 'z1' | 'z2' | func '(' expr ')' | '(' expr ')'
//! func   := re | im | conj | abs2 | exp | sqrt
//! ```
//!
//! Numbers are decimal literals with optional fraction and exponent parts;
//! complex constants are written as `a + b*i`. Errors carry the byte offset
//! of the offending token.

use super::{ScalarField, Var};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message} at offset {offset}")]
pub struct ParseError {
    pub message: String,
    pub offset: usize,
}

fn err<T>(message: impl Into<String>, offset: usize) -> Result<T, ParseError> {
    Err(ParseError {
        message: message.into(),
        offset,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug)]
struct Lexer {
    tokens: Vec<(Tok, usize)>,
    end: usize,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                tokens.push((Tok::Plus, start));
                i += 1;
            }
            '-' => {
                tokens.push((Tok::Minus, start));
                i += 1;
            }
            '*' => {
                tokens.push((Tok::Star, start));
                i += 1;
            }
            '/' => {
                tokens.push((Tok::Slash, start));
                i += 1;
            }
            '^' => {
                tokens.push((Tok::Caret, start));
                i += 1;
            }
            '(' => {
                tokens.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                tokens.push((Tok::RParen, start));
                i += 1;
            }
            '0'..='9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lit = &text[start..i];
                match lit.parse::<f64>() {
                    Ok(x) => tokens.push((Tok::Number(x), start)),
                    Err(_) => return err(format!("invalid number literal '{lit}'"), start),
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => return err(format!("unexpected character '{c}'"), start),
        }
    }
    Ok(Lexer {
        tokens,
        end: bytes.len(),
    })
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            err(format!("expected {what}"), self.offset())
        }
    }

    fn expr(&mut self) -> Result<ScalarField, ParseError> {
        let mut negate = false;
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            negate = true;
        }
        let mut acc = self.term()?;
        if negate {
            acc = super::neg(&acc);
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = super::add(&acc, &rhs);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = super::sub(&acc, &rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarField, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = super::mul(&acc, &rhs);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = super::div(&acc, &rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<ScalarField, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let mut sign = 1i32;
            if self.peek() == Some(&Tok::Minus) {
                self.pos += 1;
                sign = -1;
            }
            let off = self.offset();
            match self.bump() {
                Some(Tok::Number(x)) if x.fract() == 0.0 && x.abs() <= i32::MAX as f64 => {
                    Ok(super::powi(&base, sign * x as i32))
                }
                _ => err("expected integer exponent after '^'", off),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<ScalarField, ParseError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Number(x)) => Ok(super::konst_re(x)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "i" => Ok(super::konst(Complex64::new(0.0, 1.0))),
                "z1" => Ok(super::var(Var::Z1)),
                "z2" => Ok(super::var(Var::Z2)),
                "re" | "im" | "conj" | "abs2" | "exp" | "sqrt" => {
                    self.expect(Tok::LParen, "'('")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(match name.as_str() {
                        "re" => super::re(&arg),
                        "im" => super::im(&arg),
                        "conj" => super::conj(&arg),
                        "abs2" => super::abs2(&arg),
                        "exp" => super::exp(&arg),
                        "sqrt" => super::sqrt(&arg),
                        _ => unreachable!(),
                    })
                }
                _ => err(format!("unknown identifier '{name}'"), off),
            },
            Some(_) => err("expected a number, variable, or function", off),
            None => err("unexpected end of input", off),
        }
    }
}

/// Parse an expression string into a [`ScalarField`].
pub fn parse(text: &str) -> Result<ScalarField, ParseError> {
    let lexer = lex(text)?;
    let mut p = Parser {
        tokens: lexer.tokens,
        pos: 0,
        end: lexer.end,
    };
    let f = p.expr()?;
    if p.pos != p.tokens.len() {
        return err("unexpected trailing input", p.offset());
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::eval;
    use crate::types::ComplexPoint2;

    fn pt(a: f64, b: f64, c: f64, d: f64) -> ComplexPoint2 {
        ComplexPoint2::new(Complex64::new(a, b), Complex64::new(c, d))
    }

    #[test]
    fn unit_ball_defining_function() {
        let f = parse("abs2(z1)+abs2(z2)-1").unwrap();
        let v = eval(&f, pt(0.0, 0.0, 1.0, 0.0)).unwrap();
        assert!(v.norm() < 1e-15);
        assert!(f.real_valued());
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        let e = parse("re(z1").unwrap_err();
        assert_eq!(e.offset, 5);
    }

    #[test]
    fn unknown_identifier() {
        let e = parse("foo(z1)").unwrap_err();
        assert!(e.message.contains("unknown identifier"));
        assert_eq!(e.offset, 0);
    }

    #[test]
    fn complex_literal_arithmetic() {
        let f = parse("(1 + 2*i) * (3 + 4*i)").unwrap();
        let v = eval(&f, pt(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((v - Complex64::new(-5.0, 10.0)).norm() < 1e-15);
    }

    #[test]
    fn negative_exponent() {
        let f = parse("z1^-2").unwrap();
        let v = eval(&f, pt(2.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-15);
    }
}
