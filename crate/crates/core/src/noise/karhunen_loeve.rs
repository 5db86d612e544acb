//! Truncated sine-series (Karhunen-Loève) expansion of Brownian motion.
//!
//! On `[0, 1]`, `W(t) = √2 Σ_k sin(ω_k t) / ω_k · Z_k` with `ω_k = (k - ½)π`.
//! Coefficients are drawn from one stream per coordinate, so the first `n`
//! coefficients of an `n'`-term draw (`n' > n`) coincide with an `n`-term draw.

use std::f64::consts::{PI, SQRT_2};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::rough::{lift_piecewise_linear, lift_smooth_quadrature, RoughPath};

use super::rng::{normal, substream, Purpose};

/// How a grid reaching beyond `t = 1` is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KlScaling {
    /// Only grids inside `[0, 1]` are accepted.
    #[default]
    Unit,
    /// `W(t) = √T · W̃(t / T)` where `T` is the grid end.
    Rescale,
}

fn frequency(k: usize) -> f64 {
    (k as f64 + 0.5) * PI
}

/// One draw of the first `terms` coefficients of each coordinate.
#[derive(Debug, Clone)]
pub struct KarhunenLoeve {
    terms: usize,
    dim: usize,
    coeffs: Vec<f64>,
    horizon: f64,
}

impl KarhunenLoeve {
    pub fn sample(terms: usize, dim: usize, seed: u64, path: u64) -> Result<Self> {
        if terms == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if dim == 0 || dim > 255 {
            return Err(Error::param("dim", "must be in 1..=255"));
        }
        let mut coeffs = Vec::with_capacity(terms * dim);
        for a in 0..dim {
            let mut rng = substream(seed, path, Purpose::KarhunenLoeve, a as u64);
            coeffs.extend((0..terms).map(|_| normal(&mut rng)));
        }
        Ok(Self {
            terms,
            dim,
            coeffs,
            horizon: 1.0,
        })
    }

    /// Builds an expansion from explicit coefficients, `dim × terms`, row-major.
    pub fn from_coefficients(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 || coeffs.is_empty() || coeffs.len() % dim != 0 {
            return Err(Error::Mismatch(format!(
                "{} coefficients do not split into {dim} coordinates",
                coeffs.len()
            )));
        }
        Ok(Self {
            terms: coeffs.len() / dim,
            dim,
            coeffs,
            horizon: 1.0,
        })
    }

    /// Stretches the expansion to `[0, horizon]` by Brownian scaling.
    pub fn rescaled(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param("horizon", "must be positive and finite"));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn coefficients(&self, coordinate: usize) -> &[f64] {
        &self.coeffs[coordinate * self.terms..(coordinate + 1) * self.terms]
    }

    pub fn value(&self, t: f64, out: &mut [f64]) {
        let s = t / self.horizon;
        let scale = SQRT_2 * self.horizon.sqrt();
        for (a, o) in out.iter_mut().enumerate() {
            *o = scale
                * self
                    .coefficients(a)
                    .iter()
                    .enumerate()
                    .map(|(k, z)| {
                        let w = frequency(k);
                        (w * s).sin() / w * z
                    })
                    .sum::<f64>();
        }
    }

    pub fn derivative(&self, t: f64, out: &mut [f64]) {
        let s = t / self.horizon;
        let scale = SQRT_2 / self.horizon.sqrt();
        for (a, o) in out.iter_mut().enumerate() {
            *o = scale
                * self
                    .coefficients(a)
                    .iter()
                    .enumerate()
                    .map(|(k, z)| (frequency(k) * s).cos() * z)
                    .sum::<f64>();
        }
    }

    /// Values on a uniform grid over `[0, horizon]` with exactly `terms`
    /// cells, via one FFT of length `4 · terms` per coordinate.
    pub fn values_on_matching_grid(&self) -> Vec<f64> {
        let m = self.terms;
        let len = 4 * m;
        let fft = FftPlanner::new().plan_fft_forward(len);
        let scale = SQRT_2 * self.horizon.sqrt();
        let mut out = vec![0.0; (m + 1) * self.dim];
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for a in 0..self.dim {
            buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for (k, z) in self.coefficients(a).iter().enumerate() {
                buf[2 * k + 1] = Complex64::new(z / frequency(k), 0.0);
            }
            fft.process(&mut buf);
            for j in 0..=m {
                out[j * self.dim + a] = -scale * buf[j].im;
            }
        }
        out
    }
}

pub(crate) fn expansion_horizon(grid: &TimeGrid, scaling: KlScaling) -> Result<f64> {
    if grid.start() < 0.0 {
        return Err(Error::InvalidGrid("expansion is defined for t ≥ 0".into()));
    }
    match scaling {
        KlScaling::Unit if grid.end() > 1.0 + 1e-12 => Err(Error::InvalidGrid(format!(
            "grid ends at {} > 1; use rescaling for longer horizons",
            grid.end()
        ))),
        KlScaling::Unit => Ok(1.0),
        KlScaling::Rescale => Ok(grid.end().max(1.0)),
    }
}

/// Path and exact derivative samples, each `(N+1) × d`.
pub fn karhunen_loeve_path(
    n: usize,
    grid: &TimeGrid,
    dim: usize,
    seed: u64,
    scaling: KlScaling,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let horizon = expansion_horizon(grid, scaling)?;
    let kl = KarhunenLoeve::sample(n, dim, seed, 0)?.rescaled(horizon)?;
    let mut values = vec![0.0; grid.points().len() * dim];
    let mut derivs = vec![0.0; grid.points().len() * dim];
    for (k, &t) in grid.points().iter().enumerate() {
        kl.value(t, &mut values[k * dim..(k + 1) * dim]);
        kl.derivative(t, &mut derivs[k * dim..(k + 1) * dim]);
    }
    Ok((values, derivs))
}

/// Smooth lift of one expansion draw by Gauss-Legendre quadrature in each cell.
pub fn karhunen_loeve_lift_of(kl: &KarhunenLoeve, grid: &TimeGrid, quad_order: usize, hoelder: f64) -> Result<RoughPath> {
    lift_smooth_quadrature(
        |t, out| kl.value(t, out),
        |t, out| kl.derivative(t, out),
        kl.dim(),
        grid,
        quad_order,
        hoelder,
    )
}

pub fn karhunen_loeve_lift(
    n: usize,
    grid: &TimeGrid,
    dim: usize,
    seed: u64,
    quad_order: usize,
    scaling: KlScaling,
    hoelder: f64,
) -> Result<RoughPath> {
    let horizon = expansion_horizon(grid, scaling)?;
    let kl = KarhunenLoeve::sample(n, dim, seed, 0)?.rescaled(horizon)?;
    karhunen_loeve_lift_of(&kl, grid, quad_order, hoelder)
}

/// Stratonovich lift of the Brownian motion the expansion approximates.
///
/// The reference is a long expansion evaluated on a refined grid over
/// `[0, horizon]` and lifted piecewise-linearly. Its leading coefficients are
/// the same as every shorter expansion drawn from the same `(seed, path)`.
pub fn karhunen_loeve_reference(
    grid: &TimeGrid,
    dim: usize,
    seed: u64,
    path: u64,
    fine_factor: usize,
    scaling: KlScaling,
    hoelder: f64,
) -> Result<RoughPath> {
    let horizon = expansion_horizon(grid, scaling)?;
    if grid.start() != 0.0 || !grid.is_uniform(1e-9) {
        return Err(Error::InvalidGrid(
            "the series reference needs a uniform grid starting at 0".into(),
        ));
    }
    let fine = grid.refine(fine_factor)?;
    let span = fine.cells() as f64 * horizon / grid.end();
    let terms = span.round() as usize;
    if (span - terms as f64).abs() > 1e-6 {
        return Err(Error::InvalidGrid(format!(
            "grid mesh does not divide the expansion interval [0, {horizon}]"
        )));
    }
    let kl = KarhunenLoeve::sample(terms, dim, seed, path)?.rescaled(horizon)?;
    let values = kl.values_on_matching_grid();
    lift_piecewise_linear(&values[..(fine.cells() + 1) * dim], dim, &fine, hoelder)?.coarsen(fine_factor)
}

/// `W(t)` coupled to the expansion with `terms` coefficients: the truncated
/// series plus an independent Gaussian carrying exactly the tail variance.
pub fn coupled_brownian_value(kl: &KarhunenLoeve, t: f64, seed: u64, path: u64, out: &mut [f64]) {
    kl.value(t, out);
    let s = t / kl.horizon();
    let captured: f64 = (0..kl.terms())
        .map(|k| {
            let w = frequency(k);
            2.0 * ((w * s).sin() / w).powi(2)
        })
        .sum();
    let sd = (kl.horizon() * (s - captured).max(0.0)).sqrt();
    for (a, o) in out.iter_mut().enumerate() {
        let mut rng = substream(seed, path, Purpose::KarhunenLoeveTail, a as u64);
        *o += sd * normal(&mut rng);
    }
}
