//! Convolution of a Brownian sample with a compactly supported bump.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mollifier::{bump, bump_derivative};
use crate::rough::{lift_smooth_quadrature, RoughPath};

use super::brownian::BrownianSample;

/// `ξ^ε(t) = Σ_j w_j(t) W(s_j)` over the fine sample points `s_j` within `ε`
/// of `t`, with weights proportional to `φ((t - s_j)/ε)` and summing to one.
/// The sample is extended by its end values outside its interval.
#[derive(Debug, Clone)]
pub struct MollifiedPath<'a> {
    fine: &'a BrownianSample,
    bandwidth: f64,
    start: f64,
    mesh: f64,
}

impl<'a> MollifiedPath<'a> {
    pub fn new(fine: &'a BrownianSample, bandwidth: f64) -> Result<Self> {
        let grid = fine.grid();
        if !grid.is_uniform(1e-9) {
            return Err(Error::InvalidGrid("fine sample must be on a uniform grid".into()));
        }
        let mesh = grid.horizon() / grid.cells() as f64;
        if !(bandwidth.is_finite() && bandwidth >= 2.0 * mesh * (1.0 - 1e-9)) {
            return Err(Error::param(
                "bandwidth",
                format!("{bandwidth} is below two fine-mesh widths ({})", 2.0 * mesh),
            ));
        }
        Ok(Self {
            fine,
            bandwidth,
            start: grid.start(),
            mesh,
        })
    }

    fn support(&self, t: f64) -> (i64, i64) {
        let lo = ((t - self.bandwidth - self.start) / self.mesh).ceil() as i64;
        let hi = ((t + self.bandwidth - self.start) / self.mesh).floor() as i64;
        (lo, hi)
    }

    fn sample_at(&self, j: i64) -> &[f64] {
        let last = self.fine.grid().cells() as i64;
        self.fine.value(j.clamp(0, last) as usize)
    }

    /// Normalised weights `(j, w_j)` at time `t`.
    pub fn weights(&self, t: f64) -> Vec<(i64, f64)> {
        let (lo, hi) = self.support(t);
        let raw: Vec<(i64, f64)> = (lo..=hi)
            .map(|j| (j, bump((t - self.start - j as f64 * self.mesh) / self.bandwidth)))
            .collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        raw.into_iter().map(|(j, w)| (j, w / total)).collect()
    }

    /// Value and time derivative at `t`.
    pub fn evaluate(&self, t: f64, value: &mut [f64], deriv: &mut [f64]) {
        let (lo, hi) = self.support(t);
        let d = value.len();
        value.iter_mut().for_each(|v| *v = 0.0);
        deriv.iter_mut().for_each(|v| *v = 0.0);
        let (mut mass, mut mass_dt) = (0.0, 0.0);
        for j in lo..=hi {
            let x = (t - self.start - j as f64 * self.mesh) / self.bandwidth;
            let (w, dw) = (bump(x), bump_derivative(x) / self.bandwidth);
            mass += w;
            mass_dt += dw;
            let s = self.sample_at(j);
            for a in 0..d {
                value[a] += w * s[a];
                deriv[a] += dw * s[a];
            }
        }
        for a in 0..d {
            deriv[a] = (deriv[a] * mass - value[a] * mass_dt) / (mass * mass);
            value[a] /= mass;
        }
    }
}

pub fn mollified_lift(
    fine: &BrownianSample,
    bandwidth: f64,
    output: &TimeGrid,
    quad_order: usize,
    hoelder: f64,
) -> Result<RoughPath> {
    let path = MollifiedPath::new(fine, bandwidth)?;
    let d = fine.dim();
    lift_smooth_quadrature(
        |t, out| {
            let mut scratch = vec![0.0; d];
            path.evaluate(t, out, &mut scratch)
        },
        |t, out| {
            let mut scratch = vec![0.0; d];
            path.evaluate(t, &mut scratch, out)
        },
        d,
        output,
        quad_order,
        hoelder,
    )
}
