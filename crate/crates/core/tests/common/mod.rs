#![allow(dead_code)]

use dirac_core::{
    parse_expression, Monomial, PhaseSpace, Polynomial, Rational, RationalExpr, SamplerConfig,
};
use proptest::prelude::*;
use rand::Rng;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn e(s: &str, ps: &PhaseSpace) -> RationalExpr {
    parse_expression(s, ps).unwrap()
}

/// Product of the listed slots, so the degree is the list length.
fn monomial_from_picks(picks: &[usize]) -> Monomial {
    let mut exps = Vec::new();
    for &s in picks {
        if exps.len() <= s {
            exps.resize(s + 1, 0);
        }
        exps[s] += 1;
    }
    Monomial::from_exponents(exps)
}

pub fn poly_strategy(
    slots: usize,
    max_deg: usize,
    max_terms: usize,
) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(
        (-6i64..=6, prop::collection::vec(0..slots, 0..=max_deg)),
        1..=max_terms,
    )
    .prop_map(|terms| {
        Polynomial::from_terms(
            terms
                .into_iter()
                .map(|(c, picks)| (monomial_from_picks(&picks), q(c))),
        )
    })
}

pub fn expr_strategy(
    slots: usize,
    max_deg: usize,
    max_terms: usize,
) -> impl Strategy<Value = RationalExpr> {
    (
        poly_strategy(slots, max_deg, max_terms),
        prop::option::of(poly_strategy(slots, max_deg, max_terms)),
    )
        .prop_map(|(num, den)| match den {
            Some(d) if !d.is_zero() => RationalExpr::from_parts(num, d).unwrap(),
            _ => num.into(),
        })
}

/// Random polynomial over the first `slots` slots with coefficients in -5..=5.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    slots: &[usize],
    max_deg: usize,
    max_terms: usize,
) -> RationalExpr {
    let terms = rng.gen_range(1..=max_terms);
    Polynomial::from_terms((0..terms).map(|_| {
        let deg = rng.gen_range(0..=max_deg);
        let picks: Vec<usize> = (0..deg)
            .map(|_| slots[rng.gen_range(0..slots.len())])
            .collect();
        (monomial_from_picks(&picks), q(rng.gen_range(-5..=5)))
    }))
    .into()
}

pub fn var_slots(ps: &PhaseSpace) -> Vec<usize> {
    (0..2 * ps.n()).collect()
}

pub struct TestSystem {
    pub label: String,
    pub ps: PhaseSpace,
    pub constraints: Vec<RationalExpr>,
    pub cfg: SamplerConfig,
}

pub fn pair_elimination(n: usize, m: usize) -> TestSystem {
    let ps = PhaseSpace::new(n).unwrap();
    let constraints = (0..m).flat_map(|k| [ps.x(k), ps.p(k)]).collect();
    TestSystem {
        label: format!("pairs n={n} m={m}"),
        ps,
        constraints,
        cfg: SamplerConfig::with_seed(5),
    }
}

pub fn sphere(n: usize, radius: f64) -> TestSystem {
    let ps = PhaseSpace::with_parameters(n, ["r"]).unwrap();
    let squares: Vec<String> = (1..=n).map(|i| format!("x{i}^2")).collect();
    let dil: Vec<String> = (1..=n).map(|i| format!("p{i}*x{i}")).collect();
    let constraints = vec![
        e(&format!("{} - r^2", squares.join(" + ")), &ps),
        e(&dil.join(" + "), &ps),
    ];
    TestSystem {
        label: format!("sphere n={n}"),
        ps,
        constraints,
        cfg: SamplerConfig::with_seed(9).bind("r", radius),
    }
}

/// Constraints `x1 + x2^2 - x3*p2 = 0`, `p1 = 0`: a nonlinear graph over the
/// first pair, still second class with `Delta = [[0, 1], [-1, 0]]`.
pub fn nonlinear_graph(n: usize) -> TestSystem {
    assert!(n >= 3);
    let ps = PhaseSpace::new(n).unwrap();
    let constraints = vec![e("x1 + x2^2 - x3*p2", &ps), ps.p(0)];
    TestSystem {
        label: format!("nonlinear graph n={n}"),
        ps,
        constraints,
        cfg: SamplerConfig::with_seed(13),
    }
}

type Mat = Vec<Vec<Rational>>;

fn identity(d: usize) -> Mat {
    (0..d)
        .map(|i| (0..d).map(|j| q(i64::from(i == j))).collect())
        .collect()
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).fold(q(0), |acc, k| acc + &a[i][k] * &b[k][j]))
                .collect()
        })
        .collect()
}

#[allow(clippy::needless_range_loop)]
fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let mut s = vec![vec![q(0); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = q(rng.gen_range(-2..=2));
            s[i][j] = v.clone();
            s[j][i] = v;
        }
    }
    s
}

/// A random rational symplectic matrix on `R^{2n}` (ordering x1..xn, p1..pn),
/// built from symmetric shears and pairwise rescalings.
pub fn random_symplectic<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let d = 2 * n;
    let upper = |b: &Mat| {
        let mut m = identity(d);
        for i in 0..n {
            for j in 0..n {
                m[i][n + j] = b[i][j].clone();
            }
        }
        m
    };
    let lower = |c: &Mat| {
        let mut m = identity(d);
        for i in 0..n {
            for j in 0..n {
                m[n + i][j] = c[i][j].clone();
            }
        }
        m
    };
    let mut scale = identity(d);
    for i in 0..n {
        let lambda = Rational::new(rng.gen_range(1..=3).into(), rng.gen_range(1..=3).into());
        scale[n + i][n + i] = lambda.recip();
        scale[i][i] = lambda;
    }
    let s1 = lower(&random_symmetric(rng, n));
    let s2 = upper(&random_symmetric(rng, n));
    let s3 = lower(&random_symmetric(rng, n));
    matmul(&matmul(&matmul(&s1, &s2), &scale), &s3)
}

/// Constraints `X_k = 0, P_k = 0` for the first `m` pairs of a random linear
/// canonical transformation.
pub fn symplectic_mix<R: Rng>(rng: &mut R, n: usize, m: usize) -> TestSystem {
    let ps = PhaseSpace::new(n).unwrap();
    let s = random_symplectic(rng, n);
    let row = |r: usize| -> RationalExpr {
        (0..2 * n).fold(RationalExpr::zero(), |acc, j| {
            acc.add(&RationalExpr::var(j).scale(&s[r][j]))
        })
    };
    let constraints = (0..m).flat_map(|k| [row(k), row(n + k)]).collect();
    TestSystem {
        label: format!("linear canonical mix n={n} m={m}"),
        ps,
        constraints,
        cfg: SamplerConfig::with_seed(21),
    }
}
