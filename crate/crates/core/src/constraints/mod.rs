//! Constraint classification, the trace identity and the pair-elimination check.

mod sampler;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::bracket::{delta_matrix, invert_matrix, poisson_bracket, DiracContext};
use crate::error::{Error, Result};
use crate::expr::{PhaseSpace, RationalExpr, Var};

pub use sampler::{sample_on_shell, sample_surface, Point, SamplerConfig};

/// Relative singular-value threshold for the numeric on-shell rank.
pub const RANK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    SecondClass,
    Degenerate,
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConstraintKind::SecondClass => "second_class",
            ConstraintKind::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub verdict: ConstraintKind,
    pub m: usize,
    pub symbolic_det_nonzero: bool,
    /// Smallest numeric rank of `Delta` over the sampled on-shell points.
    pub on_shell_rank: usize,
    pub dof_pairs: usize,
}

/// Remaining canonical pairs after removing `m` second-class pairs.
pub fn dof_count(n: usize, m: usize) -> Result<usize> {
    n.checked_sub(m).ok_or(Error::InvalidCounts { n, m })
}

/// Numeric rank of a matrix: singular values above `RANK_THRESHOLD` times
/// the largest one, floored at 1 so a uniformly vanishing matrix has rank 0.
pub fn numeric_rank(mat: &nalgebra::DMatrix<f64>) -> usize {
    let sv = mat.singular_values();
    let max = sv.max();
    if !max.is_finite() {
        return 0;
    }
    let cutoff = RANK_THRESHOLD * max.max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Decides whether `constraints` are second class: `Delta` must be invertible
/// as a matrix of rational functions and of full rank at every sampled
/// on-shell point.
pub fn classify_constraints(
    ps: &PhaseSpace,
    constraints: &[RationalExpr],
    cfg: &SamplerConfig,
) -> Result<Classification> {
    let delta = delta_matrix(constraints, ps)?;
    let k = constraints.len();
    let m = k / 2;
    let dof_pairs = dof_count(ps.n(), m).map_err(|_| Error::TooManyConstraints {
        constraints: k,
        pairs: ps.n(),
        max: 2 * ps.n(),
    })?;
    let symbolic_det_nonzero = match invert_matrix(&delta) {
        Ok(_) => true,
        Err(Error::SingularMatrix { .. }) => false,
        Err(e) => return Err(e),
    };
    let points = sample_surface(ps, constraints, cfg)?;
    let on_shell_rank = points
        .iter()
        .map(|p| delta.eval(p).map_or(0, |d| numeric_rank(&d)))
        .min()
        .unwrap_or(0);
    let verdict = if symbolic_det_nonzero && on_shell_rank == k {
        ConstraintKind::SecondClass
    } else {
        ConstraintKind::Degenerate
    };
    Ok(Classification {
        verdict,
        m,
        symbolic_det_nonzero,
        on_shell_rank,
        dof_pairs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceIdentity {
    pub value: RationalExpr,
    pub expected: i64,
    pub holds: bool,
}

/// `sum_i {x_i, p_i}_D` compared against `n - m`.
pub fn trace_identity(ctx: &DiracContext) -> TraceIdentity {
    let ps = ctx.phase_space();
    let value = (0..ps.n()).fold(RationalExpr::zero(), |acc, i| {
        acc.add(&ctx.dirac_bracket(&ps.x(i), &ps.p(i)))
    });
    let expected = (ps.n() - ctx.m()) as i64;
    let holds = value.sub(&RationalExpr::from(expected)).is_zero();
    TraceIdentity {
        value,
        expected,
        holds,
    }
}

/// Checks that the Dirac bracket of a context whose constraints are exactly
/// `{x_k, p_k : k in eliminated}` agrees with the Poisson bracket on the
/// phase space with those pairs removed. Indices are zero-based.
pub fn reduction_check(
    ctx: &DiracContext,
    eliminated: &BTreeSet<usize>,
    f: &RationalExpr,
    g: &RationalExpr,
) -> Result<bool> {
    let ps = ctx.phase_space();
    let n = ps.n();
    if let Some(&k) = eliminated.iter().find(|&&k| k >= n) {
        return Err(Error::PreconditionViolated(format!(
            "pair index {k} out of range"
        )));
    }
    let mut expected: Vec<usize> = eliminated
        .iter()
        .flat_map(|&k| [ps.slot(Var::X(k)), ps.slot(Var::P(k))])
        .collect();
    let mut actual = ctx
        .constraints()
        .iter()
        .map(single_variable)
        .collect::<Option<Vec<usize>>>()
        .ok_or_else(|| {
            Error::PreconditionViolated("constraints are not bare canonical variables".into())
        })?;
    expected.sort_unstable();
    actual.sort_unstable();
    if expected != actual {
        return Err(Error::PreconditionViolated(
            "constraints do not match the eliminated pairs".into(),
        ));
    }
    for (label, e) in [("f", f), ("g", g)] {
        if let Some(slot) = expected.iter().find(|&&s| e.mentions_slot(s)) {
            let name = ps.name(ps.var_at(*slot).expect("slot in range"));
            return Err(Error::PreconditionViolated(format!(
                "{label} mentions eliminated variable {name}"
            )));
        }
    }

    let kept: Vec<usize> = (0..n).filter(|k| !eliminated.contains(k)).collect();
    if kept.is_empty() {
        // Nothing survives: both sides are brackets of constants.
        return Ok(ctx.dirac_bracket(f, g).is_zero());
    }
    let reduced = PhaseSpace::with_parameters(kept.len(), ps.parameters().iter().cloned())?;
    let to_reduced = |slot: usize| match ps.var_at(slot) {
        Some(Var::X(i)) => reduced.slot(Var::X(kept.binary_search(&i).expect("kept variable"))),
        Some(Var::P(i)) => reduced.slot(Var::P(kept.binary_search(&i).expect("kept variable"))),
        Some(Var::Param(k)) => reduced.slot(Var::Param(k)),
        None => unreachable!("slot outside phase space"),
    };
    let to_full = |slot: usize| match reduced.var_at(slot) {
        Some(Var::X(i)) => ps.slot(Var::X(kept[i])),
        Some(Var::P(i)) => ps.slot(Var::P(kept[i])),
        Some(Var::Param(k)) => ps.slot(Var::Param(k)),
        None => unreachable!("slot outside reduced phase space"),
    };
    let reduced_bracket =
        poisson_bracket(&f.map_slots(to_reduced), &g.map_slots(to_reduced), &reduced);
    let lifted = reduced_bracket.map_slots(to_full);
    Ok(ctx.dirac_bracket(f, g) == lifted)
}

fn single_variable(e: &RationalExpr) -> Option<usize> {
    let p = e.as_polynomial()?;
    if p.num_terms() != 1 {
        return None;
    }
    let (m, c) = p.leading_term()?;
    if !num_traits::One::is_one(c) || m.degree() != 1 {
        return None;
    }
    m.support().next().map(|(slot, _)| slot)
}
