//! Second-order (Davie) solver for `dY = b(Y, u) dt + σ(Y) d𝐗` driven by a
//! level-2 rough path, and the compensated rough integral.

mod field;

pub use field::{jacobian_mismatch, ItoCorrected, VectorField};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::rough::{ControlledPath, RoughPath};

/// A Markov feedback law `(t, x) ↦ u`.
pub trait Feedback: Sync {
    fn action(&self, t: f64, x: &[f64]) -> f64;
}

impl<F> Feedback for F
where
    F: Fn(f64, &[f64]) -> f64 + Sync,
{
    fn action(&self, t: f64, x: &[f64]) -> f64 {
        self(t, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// The state must stay in `[-guard, guard]^m`.
    pub guard: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { guard: 1e10 }
    }
}

/// Reusable buffers for one-step updates. One stepper per thread.
#[derive(Debug, Clone)]
pub struct DavieStepper {
    m: usize,
    d: usize,
    drift: Vec<f64>,
    sigma: Vec<f64>,
    jac: Vec<f64>,
}

impl DavieStepper {
    pub fn new<V: VectorField + ?Sized>(vf: &V) -> Self {
        let (m, d) = (vf.state_dim(), vf.noise_dim());
        Self {
            m,
            d,
            drift: vec![0.0; m],
            sigma: vec![0.0; m * d],
            jac: vec![0.0; m * d * m],
        }
    }

    /// `σ(y)` from the most recent step, `m × d`.
    pub fn last_sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Advances `y` in place over one cell with level-1 increment `x`,
    /// level-2 increment `xx` (`d × d`) and action `u`.
    pub fn step<V: VectorField + ?Sized>(&mut self, vf: &V, y: &mut [f64], u: f64, dt: f64, x: &[f64], xx: &[f64]) {
        let (m, d) = (self.m, self.d);
        vf.drift(y, u, &mut self.drift);
        vf.sigma(y, &mut self.sigma);
        vf.sigma_jacobian(y, &mut self.jac);
        for i in 0..m {
            let mut dy = self.drift[i] * dt;
            for j in 0..d {
                dy += self.sigma[i * d + j] * x[j];
                for l in 0..d {
                    let mut c = 0.0;
                    for p in 0..m {
                        c += self.jac[(i * d + j) * m + p] * self.sigma[p * d + l];
                    }
                    dy += c * xx[l * d + j];
                }
            }
            self.drift[i] = dy;
        }
        for (yi, dy) in y.iter_mut().zip(&self.drift) {
            *yi += dy;
        }
    }
}

pub(crate) fn escaped(y: &[f64], guard: f64) -> Option<f64> {
    let worst = y.iter().map(|v| v.abs()).fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    (worst > guard).then_some(worst)
}

/// One Davie step per grid cell, with the control evaluated at the left end.
/// Without a policy the action is `0`.
pub fn solve_rde<V: VectorField + ?Sized>(
    vf: &V,
    policy: Option<&dyn Feedback>,
    drv: &RoughPath,
    y0: &[f64],
    opts: &SolverOptions,
) -> Result<ControlledPath> {
    let (m, d) = (vf.state_dim(), vf.noise_dim());
    if y0.len() != m {
        return Err(Error::Mismatch(format!("initial state has {} entries, field expects {m}", y0.len())));
    }
    if drv.dim() != d {
        return Err(Error::Mismatch(format!("driver has dimension {}, field expects {d}", drv.dim())));
    }
    crate::error::ensure_finite("initial state", y0)?;
    let grid = drv.grid();
    let n = grid.cells();
    let mut stepper = DavieStepper::new(vf);
    let mut values = Vec::with_capacity((n + 1) * m);
    let mut deriv = Vec::with_capacity((n + 1) * m * d);
    let mut y = y0.to_vec();
    values.extend_from_slice(&y);
    for k in 0..n {
        let t = grid.points()[k];
        let u = policy.map_or(0.0, |p| p.action(t, &y));
        stepper.step(vf, &mut y, u, grid.step(k), drv.cell_increment(k), drv.cell_second_level(k));
        deriv.extend_from_slice(stepper.last_sigma());
        if let Some(magnitude) = escaped(&y, opts.guard) {
            return Err(Error::Divergence { step: k + 1, magnitude });
        }
        values.extend_from_slice(&y);
    }
    let mut last = vec![0.0; m * d];
    vf.sigma(&y, &mut last);
    deriv.extend_from_slice(&last);
    ControlledPath::new(grid.clone(), m, d, values, deriv)
}

/// `Σ_k y_k ⊗ X_k + y'_k 𝕏_k`, an `m × d` matrix.
pub fn rough_integral(cp: &ControlledPath, drv: &RoughPath) -> Result<Vec<f64>> {
    cp.ensure_driver(drv)?;
    let (m, d) = (cp.dim(), cp.noise_dim());
    let mut out = vec![0.0; m * d];
    for k in 0..drv.cells() {
        let (y, yp) = (cp.value(k), cp.derivative(k));
        let (x, xx) = (drv.cell_increment(k), drv.cell_second_level(k));
        for i in 0..m {
            for j in 0..d {
                let mut s = y[i] * x[j];
                for l in 0..d {
                    s += yp[i * d + l] * xx[l * d + j];
                }
                out[i * d + j] += s;
            }
        }
    }
    Ok(out)
}

/// Largest deviation `max |y_ref - y_test|` over grid points present in both.
pub fn strong_error(reference: &ControlledPath, test: &ControlledPath) -> Result<f64> {
    if reference.dim() != test.dim() {
        return Err(Error::Mismatch("paths have different state dimensions".into()));
    }
    let shared = shared_points(reference.grid(), test.grid());
    if shared.is_empty() {
        return Err(Error::Mismatch("paths share no grid points".into()));
    }
    let mut worst: f64 = 0.0;
    for (i, j) in shared {
        let diff: f64 = reference
            .value(i)
            .iter()
            .zip(test.value(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        worst = worst.max(diff.sqrt());
    }
    Ok(worst)
}

fn shared_points(a: &TimeGrid, b: &TimeGrid) -> Vec<(usize, usize)> {
    let (pa, pb) = (a.points(), b.points());
    let tol = 1e-12 * (1.0 + pa[pa.len() - 1].abs().max(pb[pb.len() - 1].abs()));
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < pa.len() && j < pb.len() {
        if (pa[i] - pb[j]).abs() <= tol {
            out.push((i, j));
            i += 1;
            j += 1;
        } else if pa[i] < pb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}
