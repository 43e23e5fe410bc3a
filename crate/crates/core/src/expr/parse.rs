//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr       := term (("+" | "-") term)*
//! term       := factor (("*" | "/") factor)*
//! factor     := "-" factor | base ("^" "-"? integer)?
//! base       := number | identifier | "(" expr ")"
//! number     := integer ("/" integer)?
//! identifier := [A-Za-z][A-Za-z0-9_]*
//! ```
//!
//! `^` binds tighter than unary minus, so `-x1^2` is `-(x1^2)`. A literal
//! `a/b` directly followed by `^` is raised as one rational, i.e. `3/2^2` is
//! `9/4`. Implicit multiplication is rejected.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{PhaseSpace, Polynomial, Rational, RationalExpr};
use crate::error::{Error, Result};

const MAX_DEPTH: usize = 128;
const MAX_EXPONENT: u64 = 256;
/// Upper bound on the estimated number of terms any intermediate may reach.
const MAX_TERMS: f64 = 100_000.0;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(i) => format!("number `{i}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let tok = match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..i];
                out.push((Tok::Int(digits.parse().expect("ascii digits")), start));
                continue;
            }
            b if b.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let found = text[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: start,
                    expected: vec!["number", "identifier", "operator", "parenthesis"],
                    found: format!("character {found:?}"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

/// Parses `text` into a canonical expression over `ps`.
pub fn parse_expression(text: &str, ps: &PhaseSpace) -> Result<RationalExpr> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        ps,
        depth: 0,
    };
    let e = parser.expr()?;
    parser.expect_end()?;
    Ok(e)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    ps: &'a PhaseSpace,
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: Vec<&'static str>) -> Error {
        Error::Syntax {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn expect_end(&self) -> Result<()> {
        match self.peek() {
            Tok::End => Ok(()),
            _ => Err(self.error(vec!["operator", "end of input"])),
        }
    }

    fn too_large(&self, offset: usize, reason: String) -> Error {
        Error::TooLarge { offset, reason }
    }

    fn expr(&mut self) -> Result<RationalExpr> {
        let mut acc = self.term()?;
        loop {
            let subtract = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => return Ok(acc),
            };
            let at = self.offset();
            self.bump();
            let rhs = self.term()?;
            self.check_size(at, estimate_sum(&acc, &rhs))?;
            acc = if subtract {
                acc.sub(&rhs)
            } else {
                acc.add(&rhs)
            };
        }
    }

    fn term(&mut self) -> Result<RationalExpr> {
        let mut acc = self.factor()?;
        loop {
            let divide = match self.peek() {
                Tok::Star => false,
                Tok::Slash => true,
                _ => return Ok(acc),
            };
            let at = self.offset();
            self.bump();
            let rhs = self.factor()?;
            self.check_size(at, estimate_product(&acc, &rhs))?;
            acc = if divide {
                acc.div(&rhs).map_err(|_| Error::DivisionByZero)?
            } else {
                acc.mul(&rhs)
            };
        }
    }

    fn factor(&mut self) -> Result<RationalExpr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.too_large(self.offset(), format!("nesting deeper than {MAX_DEPTH}")));
        }
        let out = if *self.peek() == Tok::Minus {
            self.bump();
            self.factor().map(|f| f.neg())
        } else {
            self.power()
        };
        self.depth -= 1;
        out
    }

    fn power(&mut self) -> Result<RationalExpr> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let at = self.offset();
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let exp = match self.peek() {
            Tok::Int(i) => i.clone(),
            _ => return Err(self.error(vec!["integer exponent"])),
        };
        self.bump();
        let magnitude = exp
            .to_u64()
            .filter(|&e| e <= MAX_EXPONENT)
            .ok_or_else(|| self.too_large(at, format!("exponent {exp} exceeds {MAX_EXPONENT}")))?;
        self.check_size(at, estimate_power(&base, magnitude))?;
        let signed = if negative {
            -(magnitude as i64)
        } else {
            magnitude as i64
        };
        base.pow(signed)
    }

    fn base(&mut self) -> Result<RationalExpr> {
        let at = self.offset();
        match self.bump() {
            Tok::Int(num) => {
                // number := integer ("/" integer)?
                let is_literal_fraction = self.peek() == &Tok::Slash
                    && matches!(self.tokens.get(self.pos + 1), Some((Tok::Int(_), _)));
                if !is_literal_fraction {
                    return Ok(Rational::from_integer(num).into());
                }
                self.bump();
                let den_at = self.offset();
                let Tok::Int(den) = self.bump() else {
                    unreachable!("checked above")
                };
                if den.is_zero() {
                    return Err(Error::Syntax {
                        offset: den_at,
                        expected: vec!["nonzero denominator"],
                        found: "`0`".into(),
                    });
                }
                Ok(Rational::new(num, den).into())
            }
            Tok::Ident(name) => match self.ps.lookup(&name) {
                Some(v) => Ok(RationalExpr::var(self.ps.slot(v))),
                None => Err(Error::UnknownSymbol { name, offset: at }),
            },
            Tok::LParen => {
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return Err(self.too_large(at, format!("nesting deeper than {MAX_DEPTH}")));
                }
                let inner = self.expr()?;
                self.depth -= 1;
                match self.peek() {
                    Tok::RParen => {
                        self.bump();
                        Ok(inner)
                    }
                    _ => Err(self.error(vec!["`)`", "operator"])),
                }
            }
            other => Err(Error::Syntax {
                offset: at,
                expected: vec!["number", "identifier", "`(`", "`-`"],
                found: other.describe(),
            }),
        }
    }

    fn check_size(&self, at: usize, estimate: f64) -> Result<()> {
        if estimate > MAX_TERMS {
            return Err(self.too_large(
                at,
                format!("intermediate result would have about {estimate:.0} terms"),
            ));
        }
        Ok(())
    }
}

fn estimate_sum(a: &RationalExpr, b: &RationalExpr) -> f64 {
    let (an, ad) = sizes(a);
    let (bn, bd) = sizes(b);
    (an * bd + bn * ad).max(ad * bd)
}

fn estimate_product(a: &RationalExpr, b: &RationalExpr) -> f64 {
    let (an, ad) = sizes(a);
    let (bn, bd) = sizes(b);
    (an * bn).max(ad * bd).max(an * bd).max(ad * bn)
}

fn estimate_power(base: &RationalExpr, exp: u64) -> f64 {
    let bound = |p: &Polynomial| {
        let terms = p.num_terms().max(1) as f64;
        if terms <= 1.0 {
            return 1.0;
        }
        let vars = (0..p.slot_span()).filter(|&s| p.mentions_slot(s)).count() as f64;
        let degree = p.degree() as f64 * exp as f64;
        // Dense bound: number of monomials of degree <= D in k variables.
        let dense = log_binomial(degree + vars, vars);
        let sparse = exp as f64 * terms.ln();
        dense.min(sparse).exp()
    };
    bound(base.numerator()).max(bound(base.denominator()))
}

fn sizes(e: &RationalExpr) -> (f64, f64) {
    (
        e.numerator().num_terms().max(1) as f64,
        e.denominator().num_terms().max(1) as f64,
    )
}

fn log_binomial(n: f64, k: f64) -> f64 {
    (1..=k as u64)
        .map(|i| ((n - k + i as f64) / i as f64).ln())
        .sum()
}
