//! Parser for the germ grammar.
//!
//! Variables `x1..x<r>`, `y1..y<k>`, plus declared parameter names (`q1`,
//! `z`, `u1`, ...); integer or rational coefficients `a/b`; operators
//! `+ - * ^`; parentheses allowed; implicit multiplication is not.
//! Whitespace is insignificant.

use std::sync::Arc;

use num::{BigInt, BigRational};
use thiserror::Error;

use crate::poly::{Coef, CornerPoly, VarSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {0}: {1}")]
    Syntax(usize, String),
    #[error("unknown variable `{1}` at position {0}")]
    UnknownVariable(usize, String),
    #[error("exponent must be a nonnegative integer at position {0}")]
    BadExponent(usize),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' => {
                let num = self.read_int();
                self.skip_ws();
                if self.pos < self.src.len() && self.src[self.pos] == b'/' {
                    self.pos += 1;
                    self.skip_ws();
                    if self.pos >= self.src.len() || !self.src[self.pos].is_ascii_digit() {
                        return Err(ParseError::Syntax(
                            self.pos,
                            "expected denominator after `/`".into(),
                        ));
                    }
                    let den = self.read_int();
                    if den == BigInt::from(0) {
                        return Err(ParseError::Syntax(start, "zero denominator".into()));
                    }
                    Tok::Num(BigRational::new(num, den))
                } else {
                    Tok::Num(BigRational::from_integer(num))
                }
            }
            c if c.is_ascii_alphabetic() => {
                let s = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(String::from_utf8_lossy(&self.src[s..self.pos]).into_owned())
            }
            other => {
                return Err(ParseError::Syntax(
                    start,
                    format!("unexpected character `{}`", other as char),
                ))
            }
        };
        Ok(Some((start, tok)))
    }

    fn read_int(&mut self) -> BigInt {
        let s = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[s..self.pos])
            .parse()
            .unwrap()
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    vars: Arc<VarSet>,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.idx)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<CornerPoly, ParseError> {
        let mut negate = false;
        if let Some((_, tok)) = self.peek() {
            match tok {
                Tok::Minus => {
                    negate = true;
                    self.bump();
                }
                Tok::Plus => {
                    self.bump();
                }
                _ => {}
            }
        }
        let mut acc = self.product()?;
        if negate {
            acc = acc.neg();
        }
        while let Some((_, tok)) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.bump();
                    let t = self.product()?;
                    acc = acc.add(&t);
                }
                Tok::Minus => {
                    self.bump();
                    let t = self.product()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<CornerPoly, ParseError> {
        let mut acc = self.power()?;
        while let Some((_, Tok::Star)) = self.peek() {
            self.bump();
            let f = self.power()?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<CornerPoly, ParseError> {
        let base = self.atom()?;
        if let Some((_, Tok::Caret)) = self.peek() {
            self.bump();
            match self.bump() {
                Some((pos, Tok::Num(n))) => {
                    if !n.is_integer() || n < BigRational::from_integer(0.into()) {
                        return Err(ParseError::BadExponent(pos));
                    }
                    let e: u32 = n
                        .to_integer()
                        .try_into()
                        .map_err(|_| ParseError::BadExponent(pos))?;
                    Ok(base.pow_trunc(e, None))
                }
                Some((pos, _)) => Err(ParseError::BadExponent(pos)),
                None => Err(ParseError::BadExponent(self.end)),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<CornerPoly, ParseError> {
        match self.bump() {
            Some((_, Tok::Num(n))) => Ok(CornerPoly::constant(self.vars.clone(), n as Coef)),
            Some((pos, Tok::Ident(name))) => match self.vars.resolve(&name) {
                Some(v) => Ok(CornerPoly::var(self.vars.clone(), v)),
                None => Err(ParseError::UnknownVariable(pos, name)),
            },
            Some((_, Tok::LParen)) => {
                let e = self.expr()?;
                match self.bump() {
                    Some((_, Tok::RParen)) => Ok(e),
                    Some((pos, _)) => Err(ParseError::Syntax(pos, "expected `)`".into())),
                    None => Err(ParseError::Syntax(self.end, "unclosed `(`".into())),
                }
            }
            Some((pos, tok)) => Err(ParseError::Syntax(
                pos,
                format!("unexpected token {:?}", tok),
            )),
            None => Err(ParseError::Syntax(
                self.end,
                "unexpected end of input".into(),
            )),
        }
    }
}

/// Parse a germ expression over `x1..xr`, `y1..yk`, and the given params.
pub fn parse_poly(
    text: &str,
    r: usize,
    k: usize,
    params: &[String],
) -> Result<CornerPoly, ParseError> {
    parse_in(text, VarSet::new(r, k, params.to_vec()))
}

/// Parse in an existing variable set.
pub fn parse_in(text: &str, vars: Arc<VarSet>) -> Result<CornerPoly, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let end = text.len();
    let mut p = Parser {
        toks,
        idx: 0,
        vars,
        end,
    };
    let e = p.expr()?;
    if let Some((pos, tok)) = p.peek() {
        return Err(ParseError::Syntax(
            *pos,
            format!("trailing token {:?}", tok),
        ));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::coef_frac;

    #[test]
    fn parses_f4_base() {
        let f = parse_poly("x1^2 + y1^3", 1, 1, &[]).unwrap();
        assert_eq!(f.num_terms(), 2);
        assert_eq!(f.degree(), Some(3));
    }

    #[test]
    fn parses_zero() {
        let f = parse_poly("0", 0, 1, &[]).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn parses_rational_coefficients() {
        let f = parse_poly("3/2*y1*q1 - y1^4", 0, 1, &["q1".to_string()]).unwrap();
        assert_eq!(f.num_terms(), 2);
        let m = f
            .terms()
            .find(|(m, _)| m.degree() == 2)
            .map(|(_, c)| c.clone())
            .unwrap();
        assert_eq!(m, coef_frac(3, 2));
    }

    #[test]
    fn rejects_unknown_variable() {
        let err = parse_poly("x1 + w3", 1, 0, &[]).unwrap_err();
        assert!(matches!(err, ParseError::UnknownVariable(_, _)));
        // y out of declared range
        let err = parse_poly("y2", 0, 1, &[]).unwrap_err();
        assert!(matches!(err, ParseError::UnknownVariable(_, _)));
    }

    #[test]
    fn reports_syntax_error_position() {
        let err = parse_poly("x1 + + ^", 1, 0, &[]).unwrap_err();
        match err {
            ParseError::Syntax(pos, _) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_exponent() {
        let err = parse_poly("x1^-2", 1, 0, &[]).unwrap_err();
        assert!(matches!(
            err,
            ParseError::BadExponent(_) | ParseError::Syntax(_, _)
        ));
    }
}
