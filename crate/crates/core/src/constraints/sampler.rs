//! Newton projection of random seeds onto the constraint surface.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bracket::DiracContext;
use crate::error::{Error, Result};
use crate::expr::{PhaseSpace, RationalExpr, Var};

/// A numeric point, indexed by polynomial slot (variables, then parameters).
pub type Point = Vec<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub tolerance: f64,
    pub max_newton_iters: usize,
    pub max_retries: usize,
    pub point_count: usize,
    pub bindings: BTreeMap<String, f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            tolerance: 1e-10,
            max_newton_iters: 100,
            max_retries: 50,
            point_count: 16,
            bindings: BTreeMap::new(),
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn bind(mut self, name: impl Into<String>, value: f64) -> Self {
        self.bindings.insert(name.into(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.point_count == 0 {
            return Err(Error::InvalidConfig(
                "point_count must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Numeric values of the parameters in slot order.
    fn parameter_values(&self, ps: &PhaseSpace) -> Result<Vec<f64>> {
        ps.parameters()
            .iter()
            .map(|name| {
                self.bindings
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::UnboundSymbol(name.clone()))
            })
            .collect()
    }
}

/// Returns `cfg.point_count` points where every constraint of `ctx` vanishes
/// to within `cfg.tolerance`.
pub fn sample_on_shell(ctx: &DiracContext, cfg: &SamplerConfig) -> Result<Vec<Point>> {
    sample_surface(ctx.phase_space(), ctx.constraints(), cfg)
}

/// Same as [`sample_on_shell`] for an arbitrary (not necessarily second
/// class) constraint list.
pub fn sample_surface(
    ps: &PhaseSpace,
    constraints: &[RationalExpr],
    cfg: &SamplerConfig,
) -> Result<Vec<Point>> {
    cfg.validate()?;
    let params = cfg.parameter_values(ps)?;
    let newton = Newton::new(ps, constraints, params, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut points = Vec::with_capacity(cfg.point_count);
    for index in 0..cfg.point_count {
        let mut found = None;
        for _ in 0..cfg.max_retries.max(1) {
            let start: Vec<f64> = (0..2 * ps.n())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            if let Some(p) = newton.project(start) {
                found = Some(p);
                break;
            }
        }
        match found {
            Some(p) => points.push(p),
            None => {
                return Err(Error::NoOnShellPoint {
                    point: index,
                    attempts: cfg.max_retries.max(1),
                })
            }
        }
    }
    Ok(points)
}

struct Newton<'a> {
    constraints: &'a [RationalExpr],
    /// `jacobian[a][j] = d chi_a / d z_j` over the 2n phase-space slots.
    jacobian: Vec<Vec<RationalExpr>>,
    params: Vec<f64>,
    tolerance: f64,
    max_iters: usize,
}

impl<'a> Newton<'a> {
    fn new(
        ps: &PhaseSpace,
        constraints: &'a [RationalExpr],
        params: Vec<f64>,
        cfg: &SamplerConfig,
    ) -> Self {
        let n = ps.n();
        let slots: Vec<usize> = (0..n)
            .map(|i| ps.slot(Var::X(i)))
            .chain((0..n).map(|i| ps.slot(Var::P(i))))
            .collect();
        let jacobian = constraints
            .iter()
            .map(|c| slots.iter().map(|&s| c.derivative(s)).collect())
            .collect();
        Newton {
            constraints,
            jacobian,
            params,
            tolerance: cfg.tolerance,
            max_iters: cfg.max_newton_iters,
        }
    }

    fn full_point(&self, z: &[f64]) -> Point {
        z.iter().chain(&self.params).copied().collect()
    }

    fn residual(&self, point: &[f64]) -> Option<DVector<f64>> {
        let values: Option<Vec<f64>> = self
            .constraints
            .iter()
            .map(|c| c.eval(point).ok().filter(|v| v.is_finite()))
            .collect();
        values.map(DVector::from_vec)
    }

    /// Minimum-norm Newton iteration; `None` when it fails to converge.
    fn project(&self, mut z: Vec<f64>) -> Option<Point> {
        let dim = z.len();
        for _ in 0..=self.max_iters {
            let point = self.full_point(&z);
            let f = self.residual(&point)?;
            if f.amax() <= self.tolerance {
                return Some(point);
            }
            let mut jac = DMatrix::<f64>::zeros(self.constraints.len(), dim);
            for (a, row) in self.jacobian.iter().enumerate() {
                for (j, d) in row.iter().enumerate() {
                    let v = d.eval(&point).ok()?;
                    if !v.is_finite() {
                        return None;
                    }
                    jac[(a, j)] = v;
                }
            }
            let svd = jac.svd(true, true);
            let scale = svd.singular_values.max().max(1.0);
            let step = svd.solve(&f, 1e-13 * scale).ok()?;
            for (zj, sj) in z.iter_mut().zip(step.iter()) {
                *zj -= sj;
            }
            if z.iter().any(|v| !v.is_finite() || v.abs() > 1e12) {
                return None;
            }
        }
        None
    }
}
