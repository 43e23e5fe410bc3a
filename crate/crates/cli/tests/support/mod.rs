//! System generators and numeric helpers for the acceptance suite.

use dirac_core::{Monomial, PhaseSpace, Polynomial, Rational, RationalExpr, SamplerConfig, Var};
use rand::Rng;

pub struct System {
    pub label: String,
    pub ps: PhaseSpace,
    pub constraints: Vec<RationalExpr>,
    pub cfg: SamplerConfig,
}

impl System {
    pub fn n(&self) -> usize {
        self.ps.n()
    }

    pub fn m(&self) -> usize {
        self.constraints.len() / 2
    }
}

pub fn rat(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

/// chi = (x_k, p_k) for k < m.
pub fn pair_elimination(n: usize, m: usize) -> System {
    let ps = PhaseSpace::new(n).unwrap();
    let constraints = (0..m).flat_map(|k| [ps.x(k), ps.p(k)]).collect();
    System {
        label: format!("pairs(n={n}, m={m})"),
        ps,
        constraints,
        cfg: SamplerConfig::with_seed(n as u64 * 10 + m as u64),
    }
}

/// chi = (|x|^2 - r^2, x.p) with r bound to 1.
pub fn sphere(n: usize) -> System {
    let ps = PhaseSpace::with_parameters(n, ["r"]).unwrap();
    let r = ps.param(0);
    let mut radius = r.mul(&r).neg();
    let mut dilatation = RationalExpr::zero();
    for i in 0..n {
        radius = radius.add(&ps.x(i).mul(&ps.x(i)));
        dilatation = dilatation.add(&ps.x(i).mul(&ps.p(i)));
    }
    System {
        label: format!("sphere(n={n})"),
        ps,
        constraints: vec![radius, dilatation],
        cfg: SamplerConfig::with_seed(100 + n as u64).bind("r", 1.0),
    }
}

type Mat = Vec<Vec<Rational>>;

fn identity(dim: usize) -> Mat {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { rat(1, 1) } else { rat(0, 1) })
                .collect()
        })
        .collect()
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let dim = a.len();
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| (0..dim).fold(rat(0, 1), |acc, k| acc + &a[i][k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// A random element of Sp(2n, Q) built from symmetric shears and a diagonal
/// rescaling, acting on `(x_1..x_n, p_1..p_n)`.
pub fn random_symplectic<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let dim = 2 * n;
    let mut s = identity(dim);
    for round in 0..3 {
        let mut t = identity(dim);
        for i in 0..n {
            for j in i..n {
                let v = rat(rng.gen_range(-2..=2), 1);
                // lower shear p += A x or upper shear x += B p, A and B symmetric
                let (r, c) = if round % 2 == 0 {
                    (n + i, j)
                } else {
                    (i, n + j)
                };
                t[r][c] = v.clone();
                let (r2, c2) = if round % 2 == 0 {
                    (n + j, i)
                } else {
                    (j, n + i)
                };
                t[r2][c2] = v;
            }
        }
        s = matmul(&t, &s);
    }
    let mut d = identity(dim);
    for i in 0..n {
        let k = rng.gen_range(1..=3);
        d[i][i] = rat(k, 1);
        d[n + i][n + i] = rat(1, k);
    }
    matmul(&d, &s)
}

/// New canonical pairs `(X_k, P_k) = (S z)_k, (S z)_{n+k}` for `k < m`,
/// each scaled by a random nonzero rational.
pub fn symplectic_mix<R: Rng>(rng: &mut R, n: usize, m: usize) -> System {
    let ps = PhaseSpace::new(n).unwrap();
    let s = random_symplectic(rng, n);
    let row = |r: usize| -> RationalExpr {
        (0..2 * n).fold(RationalExpr::zero(), |acc, j| {
            let var = if j < n { ps.x(j) } else { ps.p(j - n) };
            acc.add(&var.scale(&s[r][j]))
        })
    };
    let mut constraints = Vec::new();
    for k in 0..m {
        for r in [k, n + k] {
            let scale = rat(
                rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 },
                rng.gen_range(1..=3),
            );
            constraints.push(row(r).scale(&scale));
        }
    }
    System {
        label: format!("mix(n={n}, m={m})"),
        ps,
        constraints,
        cfg: SamplerConfig::with_seed(200 + 10 * n as u64 + m as u64),
    }
}

/// Random polynomial in the given slots with small rational coefficients.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    slots: &[usize],
    max_deg: u32,
    max_terms: usize,
) -> RationalExpr {
    let width = slots.iter().max().map_or(0, |s| s + 1);
    let terms = (0..rng.gen_range(1..=max_terms)).map(|_| {
        let mut exps = vec![0u32; width];
        for _ in 0..rng.gen_range(0..=max_deg) {
            exps[slots[rng.gen_range(0..slots.len())]] += 1;
        }
        let c = rat(rng.gen_range(-5..=5), rng.gen_range(1..=3));
        (Monomial::from_exponents(exps), c)
    });
    Polynomial::from_terms(terms).into()
}

/// Slots of the canonical variables of `ps`.
pub fn phase_slots(ps: &PhaseSpace) -> Vec<usize> {
    (0..ps.n())
        .flat_map(|i| [ps.slot(Var::X(i)), ps.slot(Var::P(i))])
        .collect()
}

/// Central-difference gradient.
pub fn gradient(f: &dyn Fn(&[f64]) -> f64, z: &[f64], h: f64) -> Vec<f64> {
    let mut zp = z.to_vec();
    (0..z.len())
        .map(|j| {
            zp[j] = z[j] + h;
            let up = f(&zp);
            zp[j] = z[j] - h;
            let down = f(&zp);
            zp[j] = z[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Poisson bracket from finite-difference gradients; `z = (x, p)`.
pub fn fd_poisson(f: &dyn Fn(&[f64]) -> f64, g: &dyn Fn(&[f64]) -> f64, z: &[f64]) -> f64 {
    let n = z.len() / 2;
    let (df, dg) = (gradient(f, z, 1e-5), gradient(g, z, 1e-5));
    (0..n).map(|i| df[i] * dg[n + i] - df[n + i] * dg[i]).sum()
}
