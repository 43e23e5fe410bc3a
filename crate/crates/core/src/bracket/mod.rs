//! Poisson brackets, the constraint matrix and Dirac brackets.

mod matrix;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{check_slots, PhaseSpace, RationalExpr, Var};

pub use matrix::{invert_matrix, ExprMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketMode {
    Poisson,
    Dirac,
}

impl std::fmt::Display for BracketMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BracketMode::Poisson => "poisson",
            BracketMode::Dirac => "dirac",
        })
    }
}

/// Partial derivatives of one function along every coordinate and momentum.
#[derive(Debug, Clone)]
struct Gradient {
    dx: Vec<RationalExpr>,
    dp: Vec<RationalExpr>,
}

impl Gradient {
    fn of(f: &RationalExpr, ps: &PhaseSpace) -> Self {
        let n = ps.n();
        Gradient {
            dx: (0..n).map(|i| f.derivative(ps.slot(Var::X(i)))).collect(),
            dp: (0..n).map(|i| f.derivative(ps.slot(Var::P(i)))).collect(),
        }
    }

    /// `sum_i df/dx_i dg/dp_i - df/dp_i dg/dx_i`
    fn bracket(&self, other: &Gradient) -> RationalExpr {
        let mut acc = RationalExpr::zero();
        for i in 0..self.dx.len() {
            if !self.dx[i].is_zero() && !other.dp[i].is_zero() {
                acc = acc.add(&self.dx[i].mul(&other.dp[i]));
            }
            if !self.dp[i].is_zero() && !other.dx[i].is_zero() {
                acc = acc.sub(&self.dp[i].mul(&other.dx[i]));
            }
        }
        acc
    }
}

/// The canonical Poisson bracket `{f, g}` on `ps`.
pub fn poisson_bracket(f: &RationalExpr, g: &RationalExpr, ps: &PhaseSpace) -> RationalExpr {
    Gradient::of(f, ps).bracket(&Gradient::of(g, ps))
}

/// `Delta_ab = {chi_a, chi_b}` for an even, nonempty constraint list.
pub fn delta_matrix(constraints: &[RationalExpr], ps: &PhaseSpace) -> Result<ExprMatrix> {
    if constraints.is_empty() || !constraints.len().is_multiple_of(2) {
        return Err(Error::OddConstraintCount(constraints.len()));
    }
    let grads: Vec<Gradient> = constraints.iter().map(|c| Gradient::of(c, ps)).collect();
    Ok(delta_from_gradients(&grads))
}

fn delta_from_gradients(grads: &[Gradient]) -> ExprMatrix {
    let k = grads.len();
    let mut delta = ExprMatrix::zeros(k, k);
    for a in 0..k {
        for b in a + 1..k {
            let v = grads[a].bracket(&grads[b]);
            delta[(b, a)] = v.neg();
            delta[(a, b)] = v;
        }
    }
    delta
}

/// A phase space with a validated set of second-class constraints.
///
/// `delta` and its inverse are computed once at construction.
#[derive(Debug, Clone)]
pub struct DiracContext {
    ps: PhaseSpace,
    constraints: Vec<RationalExpr>,
    gradients: Vec<Gradient>,
    delta: ExprMatrix,
    delta_inv: ExprMatrix,
}

impl DiracContext {
    pub fn new(ps: PhaseSpace, constraints: Vec<RationalExpr>) -> Result<Self> {
        let k = constraints.len();
        if k == 0 || !k.is_multiple_of(2) {
            return Err(Error::OddConstraintCount(k));
        }
        if k > 2 * ps.n() {
            return Err(Error::TooManyConstraints {
                constraints: k,
                pairs: ps.n(),
                max: 2 * ps.n(),
            });
        }
        for c in &constraints {
            check_slots(&ps, c)?;
        }
        let gradients: Vec<Gradient> = constraints.iter().map(|c| Gradient::of(c, &ps)).collect();
        let delta = delta_from_gradients(&gradients);
        let delta_inv = invert_matrix(&delta).map_err(|e| match e {
            Error::SingularMatrix { column } => Error::NotSecondClass(format!(
                "the constraint bracket matrix is singular (no pivot in column {column})"
            )),
            other => other,
        })?;
        Ok(DiracContext {
            ps,
            constraints,
            gradients,
            delta,
            delta_inv,
        })
    }

    pub fn phase_space(&self) -> &PhaseSpace {
        &self.ps
    }

    pub fn constraints(&self) -> &[RationalExpr] {
        &self.constraints
    }

    /// Number of constraint pairs.
    pub fn m(&self) -> usize {
        self.constraints.len() / 2
    }

    pub fn delta(&self) -> &ExprMatrix {
        &self.delta
    }

    pub fn delta_inv(&self) -> &ExprMatrix {
        &self.delta_inv
    }

    /// `{f, g}_D = {f, g} - {f, chi_a} Delta^-1_ab {chi_b, g}`
    pub fn dirac_bracket(&self, f: &RationalExpr, g: &RationalExpr) -> RationalExpr {
        let gf = Gradient::of(f, &self.ps);
        let gg = Gradient::of(g, &self.ps);
        let left: Vec<RationalExpr> = self.gradients.iter().map(|c| gf.bracket(c)).collect();
        let right: Vec<RationalExpr> = self.gradients.iter().map(|c| c.bracket(&gg)).collect();
        let mut correction = RationalExpr::zero();
        for (a, la) in left.iter().enumerate() {
            if la.is_zero() {
                continue;
            }
            let mut inner = RationalExpr::zero();
            for (b, rb) in right.iter().enumerate() {
                let w = &self.delta_inv[(a, b)];
                if !w.is_zero() && !rb.is_zero() {
                    inner = inner.add(&w.mul(rb));
                }
            }
            if !inner.is_zero() {
                correction = correction.add(&la.mul(&inner));
            }
        }
        gf.bracket(&gg).sub(&correction)
    }
}

/// Builds a Dirac context, failing when the constraints are not second class.
pub fn make_context(ps: PhaseSpace, constraints: Vec<RationalExpr>) -> Result<DiracContext> {
    DiracContext::new(ps, constraints)
}

pub fn dirac_bracket(f: &RationalExpr, g: &RationalExpr, ctx: &DiracContext) -> RationalExpr {
    ctx.dirac_bracket(f, g)
}

/// Which bracket to apply.
#[derive(Debug, Clone, Copy)]
pub enum Bracket<'a> {
    Poisson(&'a PhaseSpace),
    Dirac(&'a DiracContext),
}

impl Bracket<'_> {
    pub fn mode(&self) -> BracketMode {
        match self {
            Bracket::Poisson(_) => BracketMode::Poisson,
            Bracket::Dirac(_) => BracketMode::Dirac,
        }
    }

    pub fn phase_space(&self) -> &PhaseSpace {
        match self {
            Bracket::Poisson(ps) => ps,
            Bracket::Dirac(ctx) => ctx.phase_space(),
        }
    }

    pub fn apply(&self, f: &RationalExpr, g: &RationalExpr) -> RationalExpr {
        match self {
            Bracket::Poisson(ps) => poisson_bracket(f, g, ps),
            Bracket::Dirac(ctx) => ctx.dirac_bracket(f, g),
        }
    }
}

/// `B_ab = {items_a, items_b}` for every pair. Only the upper triangle is
/// computed; the lower one is its negation, so the table is exactly skew.
pub fn bracket_table(items: &[RationalExpr], bracket: Bracket<'_>) -> Result<ExprMatrix> {
    if items.is_empty() {
        return Err(Error::PreconditionViolated(
            "bracket table needs at least one item".into(),
        ));
    }
    let k = items.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
        .collect();
    let values: Vec<RationalExpr> = pairs
        .par_iter()
        .map(|&(a, b)| bracket.apply(&items[a], &items[b]))
        .collect();
    let mut table = ExprMatrix::zeros(k, k);
    for (&(a, b), v) in pairs.iter().zip(values) {
        table[(b, a)] = v.neg();
        table[(a, b)] = v;
    }
    Ok(table)
}
