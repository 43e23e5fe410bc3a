//! Exact rational-function expressions over a canonical phase space.

mod parse;
mod poly;
mod print;

use std::collections::HashSet;
use std::fmt;

use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};

pub use parse::parse_expression;
pub use poly::{Monomial, Polynomial, Rational};
pub use print::{print_expression, print_polynomial, print_rational};

/// A phase-space symbol. Indices are zero-based: `Var::X(0)` is printed `x1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize),
    P(usize),
    Param(usize),
}

/// `R^{2n}` with coordinates `x1..xn`, momenta `p1..pn` and named parameters.
///
/// The symplectic pairing is always `x_i <-> p_i`. Polynomial slots are laid
/// out as `x1..xn, p1..pn, params...`, which is also the variable order used
/// for printing and for the graded lexicographic monomial order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseSpace {
    n: usize,
    parameters: Vec<String>,
}

impl PhaseSpace {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_parameters(n, Vec::<String>::new())
    }

    pub fn with_parameters<S: Into<String>>(
        n: usize,
        parameters: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPhaseSpace("n must be at least 1".into()));
        }
        let parameters: Vec<String> = parameters.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for p in &parameters {
            let valid = p.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(Error::InvalidPhaseSpace(format!(
                    "`{p}` is not a valid identifier"
                )));
            }
            if !seen.insert(p.as_str()) {
                return Err(Error::InvalidPhaseSpace(format!(
                    "duplicate parameter `{p}`"
                )));
            }
        }
        let ps = PhaseSpace { n, parameters };
        for p in &ps.parameters {
            if ps.canonical_var(p).is_some() {
                return Err(Error::InvalidPhaseSpace(format!(
                    "parameter `{p}` clashes with a phase-space variable"
                )));
            }
        }
        Ok(ps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    /// Number of polynomial slots: `2n` variables plus the parameters.
    pub fn slot_count(&self) -> usize {
        2 * self.n + self.parameters.len()
    }

    pub fn slot(&self, v: Var) -> usize {
        match v {
            Var::X(i) => i,
            Var::P(i) => self.n + i,
            Var::Param(k) => 2 * self.n + k,
        }
    }

    pub fn var_at(&self, slot: usize) -> Option<Var> {
        if slot < self.n {
            Some(Var::X(slot))
        } else if slot < 2 * self.n {
            Some(Var::P(slot - self.n))
        } else if slot < self.slot_count() {
            Some(Var::Param(slot - 2 * self.n))
        } else {
            None
        }
    }

    pub fn name(&self, v: Var) -> String {
        match v {
            Var::X(i) => format!("x{}", i + 1),
            Var::P(i) => format!("p{}", i + 1),
            Var::Param(k) => self.parameters[k].clone(),
        }
    }

    fn canonical_var(&self, name: &str) -> Option<Var> {
        let (head, digits) = name.split_at(1.min(name.len()));
        if digits.is_empty()
            || digits.starts_with('0')
            || !digits.bytes().all(|b| b.is_ascii_digit())
        {
            return None;
        }
        let i: usize = digits.parse().ok()?;
        if i == 0 || i > self.n {
            return None;
        }
        match head {
            "x" => Some(Var::X(i - 1)),
            "p" => Some(Var::P(i - 1)),
            _ => None,
        }
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.canonical_var(name).or_else(|| {
            self.parameters
                .iter()
                .position(|p| p == name)
                .map(Var::Param)
        })
    }

    pub fn x(&self, i: usize) -> RationalExpr {
        RationalExpr::var(self.slot(Var::X(i)))
    }

    pub fn p(&self, i: usize) -> RationalExpr {
        RationalExpr::var(self.slot(Var::P(i)))
    }

    pub fn param(&self, k: usize) -> RationalExpr {
        RationalExpr::var(self.slot(Var::Param(k)))
    }
}

/// A quotient of polynomials in canonical form.
///
/// The denominator is never zero, has a positive leading coefficient under the
/// graded lexicographic order and content 1. A zero numerator forces the
/// denominator to 1. No polynomial gcd is cancelled, so equality is decided by
/// cross-multiplication.
#[derive(Clone)]
pub struct RationalExpr {
    num: Polynomial,
    den: Polynomial,
}

impl fmt::Debug for RationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}) / ({:?})", self.num, self.den)
    }
}

impl Default for RationalExpr {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<Polynomial> for RationalExpr {
    fn from(p: Polynomial) -> Self {
        RationalExpr {
            num: p,
            den: Polynomial::one(),
        }
    }
}

impl From<Rational> for RationalExpr {
    fn from(c: Rational) -> Self {
        Polynomial::constant(c).into()
    }
}

impl From<i64> for RationalExpr {
    fn from(c: i64) -> Self {
        Rational::from_integer(c.into()).into()
    }
}

impl RationalExpr {
    pub fn zero() -> Self {
        Polynomial::zero().into()
    }

    pub fn one() -> Self {
        Polynomial::one().into()
    }

    pub fn var(slot: usize) -> Self {
        Polynomial::var(slot).into()
    }

    pub fn from_parts(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Polynomial, den: Polynomial) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_one() {
            return RationalExpr { num, den };
        }
        let mut scale = den.content().recip();
        if den.leading_coefficient_sign_negative() {
            scale = -scale;
        }
        if scale.is_one() {
            RationalExpr { num, den }
        } else {
            RationalExpr {
                num: num.scale(&scale),
                den: den.scale(&scale),
            }
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        self.is_polynomial().then_some(&self.num)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_polynomial() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn mentions_slot(&self, slot: usize) -> bool {
        self.num.mentions_slot(slot) || self.den.mentions_slot(slot)
    }

    pub fn add(&self, rhs: &RationalExpr) -> RationalExpr {
        self.combine(rhs, false)
    }

    pub fn sub(&self, rhs: &RationalExpr) -> RationalExpr {
        self.combine(rhs, true)
    }

    fn combine(&self, rhs: &RationalExpr, subtract: bool) -> RationalExpr {
        let join = |a: &Polynomial, b: &Polynomial| if subtract { a - b } else { a + b };
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if subtract { rhs.neg() } else { rhs.clone() };
        }
        if self.den == rhs.den {
            return Self::normalized(join(&self.num, &rhs.num), self.den.clone());
        }
        // When one denominator divides the other, use the larger as the
        // common denominator instead of the product.
        if let Some(q) = self.den.exact_div(&rhs.den) {
            return Self::normalized(join(&self.num, &(&rhs.num * &q)), self.den.clone());
        }
        if let Some(q) = rhs.den.exact_div(&self.den) {
            return Self::normalized(join(&(&self.num * &q), &rhs.num), rhs.den.clone());
        }
        Self::normalized(
            join(&(&self.num * &rhs.den), &(&rhs.num * &self.den)),
            &self.den * &rhs.den,
        )
    }

    pub fn neg(&self) -> RationalExpr {
        RationalExpr {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, rhs: &RationalExpr) -> RationalExpr {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        Self::normalized(&self.num * &rhs.num, &self.den * &rhs.den)
    }

    pub fn div(&self, rhs: &RationalExpr) -> Result<RationalExpr> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.den == rhs.den {
            return Ok(Self::normalized(self.num.clone(), rhs.num.clone()));
        }
        Ok(Self::normalized(&self.num * &rhs.den, &self.den * &rhs.num))
    }

    pub fn recip(&self) -> Result<RationalExpr> {
        Self::one().div(self)
    }

    pub fn scale(&self, c: &Rational) -> RationalExpr {
        Self::normalized(self.num.scale(c), self.den.clone())
    }

    /// Integer power; negative exponents invert and fail on zero.
    pub fn pow(&self, exp: i64) -> Result<RationalExpr> {
        let e = u32::try_from(exp.unsigned_abs()).map_err(|_| Error::TooLarge {
            offset: 0,
            reason: format!("exponent {exp}"),
        })?;
        let raised = Self::normalized(self.num.pow(e), self.den.pow(e));
        if exp < 0 {
            raised.recip()
        } else {
            Ok(raised)
        }
    }

    /// Partial derivative with respect to a polynomial slot.
    pub fn derivative(&self, slot: usize) -> RationalExpr {
        let dnum = self.num.derivative(slot);
        let dden = self.den.derivative(slot);
        if dden.is_zero() {
            return Self::normalized(dnum, self.den.clone());
        }
        let num = &(&dnum * &self.den) - &(&self.num * &dden);
        Self::normalized(num, &self.den * &self.den)
    }

    /// Floating-point value at `point`, indexed by slot.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let den = self.den.eval(point);
        if den.is_nan() || den.abs() < 1e-12 {
            return Err(Error::PoleAtPoint);
        }
        Ok(self.num.eval(point) / den)
    }

    /// Replaces numerator and denominator by their remainders under
    /// multivariate division by `constraints`, in list order.
    pub fn reduce_mod(&self, constraints: &[Polynomial]) -> Result<RationalExpr> {
        let (_, num) = self.num.div_rem(constraints);
        let (_, den) = self.den.div_rem(constraints);
        if den.is_zero() {
            return Err(Error::ZeroDenominatorOnShell);
        }
        Ok(Self::normalized(num, den))
    }

    /// Renames polynomial slots; `map` must be injective on the slots in use.
    pub fn map_slots(&self, map: impl Fn(usize) -> usize) -> RationalExpr {
        Self::normalized(self.num.map_slots(&map), self.den.map_slots(&map))
    }

    /// The numerator divided by the denominator when that division is exact,
    /// otherwise a copy. No other cancellation is attempted.
    pub fn exact_quotient(&self) -> RationalExpr {
        if self.den.is_one() {
            return self.clone();
        }
        match self.num.exact_div(&self.den) {
            Some(q) => q.into(),
            None => self.clone(),
        }
    }

    /// Exact structural equality of the stored canonical form.
    pub fn same_form(&self, other: &RationalExpr) -> bool {
        self.num == other.num && self.den == other.den
    }
}

impl PartialEq for RationalExpr {
    fn eq(&self, other: &Self) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        (&self.num * &other.den) == (&other.num * &self.den)
    }
}

/// Checks that a polynomial only touches slots of `ps`.
pub(crate) fn check_slots(ps: &PhaseSpace, e: &RationalExpr) -> Result<()> {
    let span = e.num.slot_span().max(e.den.slot_span());
    if span > ps.slot_count() {
        return Err(Error::PreconditionViolated(format!(
            "expression uses slot {} outside a phase space with {} slots",
            span - 1,
            ps.slot_count()
        )));
    }
    Ok(())
}

/// Numeric point helper: a dense slot vector from per-variable values.
pub fn point_from_fn(ps: &PhaseSpace, mut value: impl FnMut(Var) -> f64) -> Vec<f64> {
    (0..ps.slot_count())
        .map(|s| value(ps.var_at(s).expect("slot in range")))
        .collect()
}
