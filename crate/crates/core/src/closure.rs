//! Closure of a set of primary quantities under a bracket, and the
//! finite-dimensionality verdicts derived from it.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::bracket::{bracket_table, make_context, Bracket, BracketMode};
use crate::constraints::{classify_constraints, trace_identity, ConstraintKind, SamplerConfig};
use crate::error::{Error, Result};
use crate::expr::{Monomial, PhaseSpace, Polynomial, Rational, RationalExpr};

/// Named functions that are mapped to operators, plus an optional Hamiltonian.
#[derive(Debug, Clone)]
pub struct PrimarySet {
    names: Vec<String>,
    exprs: Vec<RationalExpr>,
    hamiltonian: Option<RationalExpr>,
}

impl PrimarySet {
    pub fn new(
        names: Vec<String>,
        exprs: Vec<RationalExpr>,
        hamiltonian: Option<RationalExpr>,
    ) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::PreconditionViolated("primary set is empty".into()));
        }
        if names.len() != exprs.len() {
            return Err(Error::PreconditionViolated(format!(
                "{} names for {} expressions",
                names.len(),
                exprs.len()
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::PreconditionViolated(format!(
                    "duplicate primary `{a}`"
                )));
            }
        }
        Ok(PrimarySet {
            names,
            exprs,
            hamiltonian,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn exprs(&self) -> &[RationalExpr] {
        &self.exprs
    }

    pub fn hamiltonian(&self) -> Option<&RationalExpr> {
        self.hamiltonian.as_ref()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Result of expressing a polynomial in a basis of polynomials.
#[derive(Debug, Clone, PartialEq)]
pub enum Decomposition {
    /// `target = sum_b coefficients[b] * basis[b] + constant`
    Closed {
        coefficients: Vec<Rational>,
        constant: Rational,
    },
    /// The part of the target outside the span.
    NotClosed { residual: Polynomial },
}

/// One row of an echelon basis, remembering which input combination it is.
struct EchelonRow {
    poly: Polynomial,
    combo: Vec<Rational>,
}

/// Solves `target = sum_b lambda_b g_b (+ lambda_0)` exactly by matching
/// monomial coefficients.
///
/// The inputs are brought to echelon form one at a time in basis order (the
/// constant, when allowed, comes last); free coefficients of a dependent
/// basis are set to zero.
pub fn decompose_linear(
    target: &RationalExpr,
    basis: &[RationalExpr],
    allow_constant: bool,
) -> Result<Decomposition> {
    let require_poly = |e: &RationalExpr, what: &str| -> Result<Polynomial> {
        e.as_polynomial().cloned().ok_or_else(|| {
            Error::NonPolynomialInput(format!("{what} has a non-constant denominator"))
        })
    };
    let target = require_poly(target, "bracket value")?;
    let mut inputs = basis
        .iter()
        .map(|b| require_poly(b, "primary quantity"))
        .collect::<Result<Vec<_>>>()?;
    if allow_constant {
        inputs.push(Polynomial::one());
    }
    let width = inputs.len();

    // Rows kept sorted by leading monomial, largest first.
    let mut rows: Vec<EchelonRow> = Vec::new();
    for (idx, input) in inputs.iter().enumerate() {
        let mut combo = vec![Rational::zero(); width];
        combo[idx] = Rational::one();
        let (poly, combo) = reduce(input.clone(), combo, &rows);
        let Some((lm, lc)) = poly.leading_term() else {
            continue;
        };
        let inv = lc.recip();
        let lm = lm.clone();
        let row = EchelonRow {
            poly: poly.scale(&inv),
            combo: combo.iter().map(|c| c * &inv).collect(),
        };
        let at = rows
            .iter()
            .position(|r| leading(&r.poly) < &lm)
            .unwrap_or(rows.len());
        rows.insert(at, row);
    }

    let (residual, combo) = reduce(target, vec![Rational::zero(); width], &rows);
    if !residual.is_zero() {
        return Ok(Decomposition::NotClosed { residual });
    }
    // residual = target - sum mu_r row_r = 0 and each row is sum combo_r[i] input_i;
    // `reduce` accumulates -sum mu_r combo_r, so flip the sign.
    let mut coefficients: Vec<Rational> = combo.into_iter().map(|c| -c).collect();
    let constant = if allow_constant {
        coefficients.pop().expect("constant slot")
    } else {
        Rational::zero()
    };
    Ok(Decomposition::Closed {
        coefficients,
        constant,
    })
}

fn leading(p: &Polynomial) -> &Monomial {
    p.leading_term().expect("echelon rows are nonzero").0
}

/// Eliminates the leading monomial of every row from `poly`, tracking the
/// subtracted combination in `combo`.
fn reduce(
    mut poly: Polynomial,
    mut combo: Vec<Rational>,
    rows: &[EchelonRow],
) -> (Polynomial, Vec<Rational>) {
    for row in rows {
        let c = poly.coefficient(leading(&row.poly));
        if c.is_zero() {
            continue;
        }
        poly = &poly - &row.poly.scale(&c);
        for (acc, r) in combo.iter_mut().zip(&row.combo) {
            *acc -= &c * r;
        }
    }
    (poly, combo)
}

/// The other argument of a bracket whose value failed to decompose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Partner {
    Primary(usize),
    Hamiltonian,
}

#[derive(Debug, Clone)]
pub struct AlgebraReport {
    pub mode: BracketMode,
    pub names: Vec<String>,
    pub closed: bool,
    /// `c[a][b][c]`: coefficient of `g_c` in `{g_a, g_b}`.
    pub c: Vec<Vec<Vec<Rational>>>,
    /// `z[a][b]`: constant term (central charge) of `{g_a, g_b}`.
    pub z: Vec<Vec<Rational>>,
    /// `h[a][b]`: coefficient of `g_b` in `{g_a, H}`; column `k` holds the
    /// constant term.
    pub h: Option<Vec<Vec<Rational>>>,
    pub residuals: BTreeMap<(usize, Partner), RationalExpr>,
}

impl AlgebraReport {
    pub fn k(&self) -> usize {
        self.names.len()
    }

    /// First pair `a < b` with a nonzero central charge.
    pub fn first_central_charge(&self) -> Option<(usize, usize)> {
        let k = self.k();
        (0..k)
            .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
            .find(|&(a, b)| !self.z[a][b].is_zero())
    }
}

/// Decomposes every bracket of the primary set (and with the Hamiltonian) in
/// the span of the primaries plus constants.
///
/// With `on_shell_rules`, both the primaries and the bracket values are first
/// replaced by their remainders modulo the rules.
pub fn closure_analysis(
    primaries: &PrimarySet,
    bracket: Bracket<'_>,
    on_shell_rules: Option<&[Polynomial]>,
) -> Result<AlgebraReport> {
    let k = primaries.len();
    let reduce = |e: &RationalExpr| -> Result<RationalExpr> {
        match on_shell_rules {
            Some(rules) if !rules.is_empty() => e.reduce_mod(rules),
            _ => Ok(e.clone()),
        }
    };
    let basis = primaries
        .exprs()
        .iter()
        .map(reduce)
        .collect::<Result<Vec<_>>>()?;
    let table = bracket_table(primaries.exprs(), bracket)?;

    let zero = Rational::zero();
    let mut c = vec![vec![vec![zero.clone(); k]; k]; k];
    let mut z = vec![vec![zero.clone(); k]; k];
    let mut residuals = BTreeMap::new();
    for a in 0..k {
        for b in a + 1..k {
            let value = reduce(&table[(a, b)])?;
            match decompose_linear(&value, &basis, true)? {
                Decomposition::Closed {
                    coefficients,
                    constant,
                } => {
                    for (idx, coeff) in coefficients.into_iter().enumerate() {
                        c[b][a][idx] = -&coeff;
                        c[a][b][idx] = coeff;
                    }
                    z[b][a] = -&constant;
                    z[a][b] = constant;
                }
                Decomposition::NotClosed { residual } => {
                    residuals.insert((a, Partner::Primary(b)), residual.into());
                }
            }
        }
    }

    let h = match primaries.hamiltonian() {
        None => None,
        Some(ham) => {
            let mut rows = vec![vec![zero.clone(); k + 1]; k];
            for (a, g) in primaries.exprs().iter().enumerate() {
                let value = reduce(&bracket.apply(g, ham))?;
                match decompose_linear(&value, &basis, true)? {
                    Decomposition::Closed {
                        coefficients,
                        constant,
                    } => {
                        rows[a][..k].clone_from_slice(&coefficients);
                        rows[a][k] = constant;
                    }
                    Decomposition::NotClosed { residual } => {
                        residuals.insert((a, Partner::Hamiltonian), residual.into());
                    }
                }
            }
            Some(rows)
        }
    };

    Ok(AlgebraReport {
        mode: bracket.mode(),
        names: primaries.names().to_vec(),
        closed: residuals.is_empty(),
        c,
        z,
        h,
        residuals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    InfiniteDimensional,
    NoObstructionDetected,
    TrivialSystem,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::InfiniteDimensional => "infinite_dimensional",
            VerdictKind::NoObstructionDetected => "no_obstruction_detected",
            VerdictKind::TrivialSystem => "trivial_system",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// `{g_a, g_b}` has constant term `value`.
    CentralCharge {
        a: usize,
        b: usize,
        left: String,
        right: String,
        value: Rational,
    },
    /// `sum_i {x_i, p_i}_D = value`, expected to equal `n - m`.
    Trace { value: RationalExpr, expected: i64 },
}

impl Witness {
    /// Whether the witness carries a nonzero constant bracket.
    pub fn is_nonzero(&self) -> bool {
        match self {
            Witness::CentralCharge { value, .. } => !value.is_zero(),
            Witness::Trace { value, .. } => !value.is_zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub witness: Option<Witness>,
    pub explanation: String,
}

/// The trace argument applied to a closed algebra report: a nonzero central
/// charge rules out finite-dimensional representations.
pub fn finite_dim_obstruction(report: &AlgebraReport) -> Result<Verdict> {
    if !report.closed {
        return Err(Error::ReportNotClosed);
    }
    let mut notes = Vec::new();
    if let Some(h) = &report.h {
        let k = report.k();
        for (a, row) in h.iter().enumerate() {
            if !row[k].is_zero() {
                notes.push(format!(
                    "{{{}, H}} has constant term {}; it is kept in the constant column of h and not counted as a central charge.",
                    report.names[a], row[k]
                ));
            }
        }
    }
    let (kind, witness, mut explanation) = match report.first_central_charge() {
        Some((a, b)) => {
            let value = report.z[a][b].clone();
            let explanation = format!(
                "{{{left}, {right}}} contains the constant {value}, which maps to {value} times the identity. \
                 In a representation of finite dimension D the commutator of the images is traceless, \
                 while the right-hand side has trace {value}*D, so 0 = {value}*D: D cannot be finite.",
                left = report.names[a],
                right = report.names[b],
            );
            (
                VerdictKind::InfiniteDimensional,
                Some(Witness::CentralCharge {
                    a,
                    b,
                    left: report.names[a].clone(),
                    right: report.names[b].clone(),
                    value,
                }),
                explanation,
            )
        }
        None => (
            VerdictKind::NoObstructionDetected,
            None,
            "No bracket of the primary set has a constant term, so the trace argument gives no \
             contradiction. This is a necessary condition only: it does not show that a \
             finite-dimensional representation exists (spin algebras do have one)."
                .to_string(),
        ),
    };
    for note in notes {
        explanation.push(' ');
        explanation.push_str(&note);
    }
    Ok(Verdict {
        kind,
        witness,
        explanation,
    })
}

/// Classifies the constraints and applies the trace identity: a second-class
/// system with `m < n` pairs has `sum_i {x_i, p_i}_D = n - m != 0`, so its
/// Hilbert space cannot be finite dimensional.
pub fn lemma_verdict(
    ps: &PhaseSpace,
    constraints: &[RationalExpr],
    cfg: &SamplerConfig,
) -> Result<Verdict> {
    let classification = classify_constraints(ps, constraints, cfg)?;
    if classification.verdict == ConstraintKind::Degenerate {
        return Err(Error::NotSecondClass(format!(
            "symbolic det nonzero: {}, on-shell rank {} of {}",
            classification.symbolic_det_nonzero,
            classification.on_shell_rank,
            constraints.len()
        )));
    }
    let ctx = make_context(ps.clone(), constraints.to_vec())?;
    verdict_from_trace(&ctx)
}

/// The trace-identity half of [`lemma_verdict`], for an existing context.
pub fn verdict_from_trace(ctx: &crate::bracket::DiracContext) -> Result<Verdict> {
    let trace = trace_identity(ctx);
    if !trace.holds {
        return Err(Error::PreconditionViolated(format!(
            "trace identity failed: expected {}",
            trace.expected
        )));
    }
    let (n, m) = (ctx.phase_space().n(), ctx.m());
    let witness = Some(Witness::Trace {
        value: trace.value,
        expected: trace.expected,
    });
    if m == n {
        return Ok(Verdict {
            kind: VerdictKind::TrivialSystem,
            witness,
            explanation: format!(
                "m = n = {n}: every canonical pair is constrained, no degrees of freedom remain and \
                 sum_i {{x_i, p_i}}_D = 0, so the trace argument gives no obstruction."
            ),
        });
    }
    let k = n - m;
    Ok(Verdict {
        kind: VerdictKind::InfiniteDimensional,
        witness,
        explanation: format!(
            "sum_i {{x_i, p_i}}_D = n - m = {k}. With x_i and p_i as primary quantities this constant maps to \
             {k} times the identity. If the Hilbert space had finite dimension D, the trace of the sum of \
             commutators would vanish while the trace of the right-hand side is {k}*D, giving 0 = {k}*D. \
             Hence the Hilbert space is infinite dimensional."
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::make_context;
    use crate::expr::parse_expression;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn e(s: &str, ps: &PhaseSpace) -> RationalExpr {
        parse_expression(s, ps).unwrap()
    }

    fn angular(ps: &PhaseSpace) -> PrimarySet {
        PrimarySet::new(
            vec!["L1".into(), "L2".into(), "L3".into()],
            vec![
                e("x2*p3 - x3*p2", ps),
                e("x3*p1 - x1*p3", ps),
                e("x1*p2 - x2*p1", ps),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn decompose_examples() {
        let ps = PhaseSpace::new(3).unwrap();
        let g1 = e("x1*p2", &ps);
        assert_eq!(
            decompose_linear(&e("2*x1*p2 + 3", &ps), &[g1], true).unwrap(),
            Decomposition::Closed {
                coefficients: vec![q(2)],
                constant: q(3)
            }
        );
        assert_eq!(
            decompose_linear(&e("x1^2", &ps), &[ps.x(0)], false).unwrap(),
            Decomposition::NotClosed {
                residual: e("x1^2", &ps).numerator().clone()
            }
        );
        let l = angular(&ps);
        assert_eq!(
            decompose_linear(&l.exprs()[2], l.exprs(), false).unwrap(),
            Decomposition::Closed {
                coefficients: vec![q(0), q(0), q(1)],
                constant: q(0)
            }
        );
        assert!(matches!(
            decompose_linear(&e("1/x1", &ps), l.exprs(), true),
            Err(Error::NonPolynomialInput(_))
        ));
    }

    #[test]
    fn decompose_partial_overlap() {
        let ps = PhaseSpace::new(2).unwrap();
        let basis = [e("x1 + x2", &ps), e("x2 - p1", &ps)];
        match decompose_linear(&e("x1 + 2*x2 - p1 + 5", &ps), &basis, true).unwrap() {
            Decomposition::Closed {
                coefficients,
                constant,
            } => {
                assert_eq!(coefficients, vec![q(1), q(1)]);
                assert_eq!(constant, q(5));
            }
            other => panic!("{other:?}"),
        }
        match decompose_linear(&e("x1 + p2", &ps), &basis, false).unwrap() {
            Decomposition::NotClosed { residual } => {
                assert!(residual.mentions_slot(3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn angular_momentum_closes() {
        let ps = PhaseSpace::new(3).unwrap();
        let report = closure_analysis(&angular(&ps), Bracket::Poisson(&ps), None).unwrap();
        assert!(report.closed);
        for a in 0..3 {
            for b in 0..3 {
                assert!(report.z[a][b].is_zero());
                for c in 0..3 {
                    assert_eq!(report.c[a][b][c], q(levi_civita(a, b, c)));
                }
            }
        }
        let v = finite_dim_obstruction(&report).unwrap();
        assert_eq!(v.kind, VerdictKind::NoObstructionDetected);
        assert!(v.witness.is_none());
        assert!(v.explanation.contains("necessary condition"));
    }

    fn levi_civita(a: usize, b: usize, c: usize) -> i64 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
            _ => 0,
        }
    }

    #[test]
    fn canonical_variables_under_pair_elimination() {
        let ps = PhaseSpace::new(3).unwrap();
        let ctx = make_context(ps.clone(), vec![ps.x(0), ps.p(0)]).unwrap();
        let names = ["x1", "x2", "x3", "p1", "p2", "p3"]
            .map(String::from)
            .to_vec();
        let exprs = (0..3)
            .map(|i| ps.x(i))
            .chain((0..3).map(|i| ps.p(i)))
            .collect();
        let set = PrimarySet::new(names, exprs, None).unwrap();
        let report = closure_analysis(&set, Bracket::Dirac(&ctx), None).unwrap();
        assert!(report.closed);
        assert!(report.c.iter().flatten().flatten().all(Zero::is_zero));
        assert!(report.z[0][3].is_zero());
        assert_eq!(report.z[1][4], q(1));
        assert_eq!(report.z[2][5], q(1));
        assert_eq!(report.z[4][1], q(-1));
        let v = finite_dim_obstruction(&report).unwrap();
        assert_eq!(v.kind, VerdictKind::InfiniteDimensional);
        match v.witness {
            Some(Witness::CentralCharge {
                left, right, value, ..
            }) => {
                assert_eq!((left.as_str(), right.as_str(), value), ("x2", "p2", q(1)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_element_and_not_closed() {
        let ps = PhaseSpace::new(1).unwrap();
        let set = PrimarySet::new(vec!["q".into()], vec![e("x1^2", &ps)], None).unwrap();
        let report = closure_analysis(&set, Bracket::Poisson(&ps), None).unwrap();
        assert!(report.closed);
        assert_eq!(
            finite_dim_obstruction(&report).unwrap().kind,
            VerdictKind::NoObstructionDetected
        );

        let set = PrimarySet::new(
            vec!["a".into(), "b".into()],
            vec![e("x1^2", &ps), e("p1^2", &ps)],
            None,
        )
        .unwrap();
        let report = closure_analysis(&set, Bracket::Poisson(&ps), None).unwrap();
        assert!(!report.closed);
        assert_eq!(
            report.residuals.get(&(0, Partner::Primary(1))),
            Some(&e("4*x1*p1", &ps))
        );
        assert_eq!(
            finite_dim_obstruction(&report).unwrap_err(),
            Error::ReportNotClosed
        );
    }

    #[test]
    fn hamiltonian_coefficients() {
        let ps = PhaseSpace::new(1).unwrap();
        let set = PrimarySet::new(
            vec!["x".into(), "p".into()],
            vec![ps.x(0), ps.p(0)],
            Some(e("(p1^2 + x1^2)/2 + x1", &ps)),
        )
        .unwrap();
        let report = closure_analysis(&set, Bracket::Poisson(&ps), None).unwrap();
        assert!(report.closed);
        let h = report.h.as_ref().unwrap();
        // {x, H} = p, {p, H} = -x - 1
        assert_eq!(h[0], vec![q(0), q(1), q(0)]);
        assert_eq!(h[1], vec![q(-1), q(0), q(-1)]);
        let v = finite_dim_obstruction(&report).unwrap();
        assert_eq!(v.kind, VerdictKind::InfiniteDimensional);
        assert!(v.explanation.contains("constant column of h"));
    }

    #[test]
    fn sphere_brackets_need_on_shell_rules() {
        let ps = PhaseSpace::new(3).unwrap();
        let chi1 = e("x1^2 + x2^2 + x3^2 - 1", &ps);
        let ctx = make_context(
            ps.clone(),
            vec![chi1.clone(), e("p1*x1 + p2*x2 + p3*x3", &ps)],
        )
        .unwrap();
        let set =
            PrimarySet::new(vec!["x1".into(), "p1".into()], vec![ps.x(0), ps.p(0)], None).unwrap();
        assert!(matches!(
            closure_analysis(&set, Bracket::Dirac(&ctx), None),
            Err(Error::NonPolynomialInput(_))
        ));
        let rules = [chi1.numerator().clone()];
        let report = closure_analysis(&set, Bracket::Dirac(&ctx), Some(&rules)).unwrap();
        // {x1, p1}_D = 1 - x1^2 on shell: not in span{x1, p1, 1}
        assert!(!report.closed);

        let report = closure_analysis(&angular(&ps), Bracket::Dirac(&ctx), Some(&rules)).unwrap();
        assert!(report.closed);
        assert_eq!(report.first_central_charge(), None);
    }

    #[test]
    fn lemma_examples() {
        let ps = PhaseSpace::with_parameters(3, ["r"]).unwrap();
        let cfg = SamplerConfig::with_seed(11).bind("r", 1.0);
        let sphere = vec![
            e("x1^2 + x2^2 + x3^2 - r^2", &ps),
            e("p1*x1 + p2*x2 + p3*x3", &ps),
        ];
        let v = lemma_verdict(&ps, &sphere, &cfg).unwrap();
        assert_eq!(v.kind, VerdictKind::InfiniteDimensional);
        assert_eq!(
            v.witness,
            Some(Witness::Trace {
                value: RationalExpr::from(2),
                expected: 2
            })
        );
        assert!(v.explanation.contains("0 = 2*D"));

        let all: Vec<RationalExpr> = (0..3).flat_map(|i| [ps.x(i), ps.p(i)]).collect();
        assert_eq!(
            lemma_verdict(&ps, &all, &cfg).unwrap().kind,
            VerdictKind::TrivialSystem
        );

        assert!(matches!(
            lemma_verdict(&ps, &[ps.x(0), ps.x(1)], &cfg),
            Err(Error::NotSecondClass(_))
        ));
    }

    #[test]
    fn primary_set_validation() {
        let ps = PhaseSpace::new(1).unwrap();
        assert!(PrimarySet::new(vec![], vec![], None).is_err());
        assert!(
            PrimarySet::new(vec!["a".into(), "a".into()], vec![ps.x(0), ps.p(0)], None).is_err()
        );
        assert!(PrimarySet::new(vec!["a".into()], vec![ps.x(0), ps.p(0)], None).is_err());
    }
}
