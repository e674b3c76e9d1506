//! Recursive descent parser for coefficient expressions.
//!
//! Grammar: rationals, declared names, `+ - * / ^` (non-negative integer
//! powers) and parentheses. Whitespace is insignificant. This grammar is the
//! single source of truth for every coefficient entry in config files.

use crate::rat::{Context, Rat};
use num_bigint::BigInt;
use num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown name `{name}` at byte {pos}")]
    UnknownName { pos: usize, name: String },
    #[error("division by the zero polynomial at byte {pos}")]
    DivisionByZero { pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            b'*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            b'/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            b'^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().unwrap();
                out.push((start, Tok::Num(n)));
            }
            b if b.is_ascii_alphabetic() || b == b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Tok::Name(text[start..i].to_string())));
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{}`", &text[i..i + 1]),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    ctx: &'a Context,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Rat, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Rat, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                Some(Tok::Slash) => {
                    let pos = self.here();
                    self.bump();
                    let rhs = self.factor()?;
                    acc = acc
                        .div(&rhs)
                        .map_err(|_| ParseError::DivisionByZero { pos })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Rat, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        if let Some(Tok::Plus) = self.peek() {
            self.bump();
            return self.factor();
        }
        let mut base = self.atom()?;
        while let Some(Tok::Caret) = self.peek() {
            let pos = self.here();
            self.bump();
            match self.bump() {
                Some(Tok::Num(n)) => {
                    let e: u32 = n.try_into().map_err(|_| ParseError::Syntax {
                        pos,
                        msg: "exponent too large".into(),
                    })?;
                    base = base.pow(e);
                }
                _ => {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "expected a non-negative integer exponent after `^`".into(),
                    })
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Rat, ParseError> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(Rat::from_rational(
                self.ctx.n_vars(),
                BigRational::from_integer(n),
            )),
            Some(Tok::Name(name)) => match self.ctx.index_of(&name) {
                Some(i) => Ok(Rat::var(self.ctx.n_vars(), i)),
                None => Err(ParseError::UnknownName { pos, name }),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(ParseError::Syntax {
                        pos: self.here(),
                        msg: "expected `)`".into(),
                    }),
                }
            }
            other => Err(ParseError::Syntax {
                pos,
                msg: format!("expected a number, name or `(`, found {other:?}"),
            }),
        }
    }
}

/// Parses `text` into an exact rational function over the declared names.
pub fn parse_coeff(text: &str, ctx: &Context) -> Result<Rat, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        ctx,
        end: text.len(),
    };
    let r = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::Syntax {
            pos: p.here(),
            msg: "trailing input".into(),
        });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::Context;

    #[test]
    fn parse_examples() {
        let ctx = Context::coords(2, &["B"]);
        let z = parse_coeff("0", &ctx).unwrap();
        assert!(z.is_zero());

        let u = parse_coeff("x1/x1", &ctx).unwrap();
        assert!(u.eq_value(&Rat::one(3)));

        let f = parse_coeff("B*x1^2/(1+x2)", &ctx).unwrap();
        let num = parse_coeff("B*x1^2", &ctx).unwrap();
        let den = parse_coeff("1+x2", &ctx).unwrap();
        assert!(f.mul(&den).eq_value(&num));
    }

    #[test]
    fn whitespace_insensitive() {
        let ctx = Context::coords(2, &[]);
        let a = parse_coeff("x1 + 2*x2", &ctx).unwrap();
        let b = parse_coeff("x1+2 * x2", &ctx).unwrap();
        assert!(a.eq_value(&b));
    }

    #[test]
    fn errors_carry_positions() {
        let ctx = Context::coords(2, &[]);
        match parse_coeff("x1 + y", &ctx) {
            Err(ParseError::UnknownName { pos, name }) => {
                assert_eq!(pos, 5);
                assert_eq!(name, "y");
            }
            other => panic!("expected unknown name, got {other:?}"),
        }
        assert!(matches!(
            parse_coeff("x1/(x2-x2)", &ctx),
            Err(ParseError::DivisionByZero { .. })
        ));
        assert!(matches!(
            parse_coeff("x1 +", &ctx),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_coeff("x1^x2", &ctx),
            Err(ParseError::Syntax { .. })
        ));
    }
}
