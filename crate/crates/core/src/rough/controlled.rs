//! Controlled paths `(y, y')` and their remainder.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

use super::path::RoughPath;

/// Values `y(t_k) ∈ ℝ^m` together with a Gubinelli derivative `y'(t_k) ∈ ℝ^{m×d}`.
#[derive(Debug, Clone)]
pub struct ControlledPath {
    grid: TimeGrid,
    dim: usize,
    noise_dim: usize,
    values: Vec<f64>,
    derivative: Vec<f64>,
}

impl ControlledPath {
    pub fn new(
        grid: TimeGrid,
        dim: usize,
        noise_dim: usize,
        values: Vec<f64>,
        derivative: Vec<f64>,
    ) -> Result<Self> {
        let pts = grid.cells() + 1;
        if values.len() != pts * dim || derivative.len() != pts * dim * noise_dim {
            return Err(Error::Mismatch(format!(
                "controlled path on {pts} points (m = {dim}, d = {noise_dim}) got {} values and {} derivative entries",
                values.len(),
                derivative.len()
            )));
        }
        Ok(Self {
            grid,
            dim,
            noise_dim,
            values,
            derivative,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Row-major `m × d` block at grid point `k`.
    pub fn derivative(&self, k: usize) -> &[f64] {
        let md = self.dim * self.noise_dim;
        &self.derivative[k * md..(k + 1) * md]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terminal(&self) -> &[f64] {
        self.value(self.grid.cells())
    }

    /// `R_Y(t_i, t_j) = y(t_j) - y(t_i) - y'(t_i) X_{t_i,t_j}`.
    pub fn remainder(&self, drv: &RoughPath, i: usize, j: usize) -> Result<Vec<f64>> {
        self.ensure_driver(drv)?;
        let (x, _) = drv.chen_extend(i, j)?;
        let (m, d) = (self.dim, self.noise_dim);
        let yp = self.derivative(i);
        Ok((0..m)
            .map(|a| {
                let lin: f64 = (0..d).map(|b| yp[a * d + b] * x[b]).sum();
                self.value(j)[a] - self.value(i)[a] - lin
            })
            .collect())
    }

    /// `sup |R_Y(s,t)| / |t-s|^{2α}` over all grid pairs.
    pub fn remainder_seminorm(&self, drv: &RoughPath) -> Result<f64> {
        self.ensure_driver(drv)?;
        let (m, d) = (self.dim, self.noise_dim);
        let t = self.grid.points();
        let two_alpha = 2.0 * drv.hoelder();
        let n = self.grid.cells();
        let mut best = 0.0f64;
        let mut x = vec![0.0; d];
        for i in 0..n {
            x.fill(0.0);
            let yp = self.derivative(i);
            for j in i + 1..=n {
                for (acc, v) in x.iter_mut().zip(drv.cell_increment(j - 1)) {
                    *acc += v;
                }
                let mut r2 = 0.0;
                for a in 0..m {
                    let lin: f64 = (0..d).map(|b| yp[a * d + b] * x[b]).sum();
                    let r = self.value(j)[a] - self.value(i)[a] - lin;
                    r2 += r * r;
                }
                best = best.max(r2.sqrt() / (t[j] - t[i]).powf(two_alpha));
            }
        }
        Ok(best)
    }

    pub(crate) fn ensure_driver(&self, drv: &RoughPath) -> Result<()> {
        if drv.grid() != &self.grid || drv.dim() != self.noise_dim {
            return Err(Error::Mismatch(format!(
                "driver ({} cells, d = {}) does not match controlled path ({} cells, d = {})",
                drv.cells(),
                drv.dim(),
                self.grid.cells(),
                self.noise_dim
            )));
        }
        Ok(())
    }

    /// Columnar export: `t, y_1..y_m, y'_{11}..y'_{md}` per grid point.
    pub fn to_columnar(&self) -> String {
        let (m, d) = (self.dim, self.noise_dim);
        let mut out = String::from("# controlled-path v1\n");
        let _ = writeln!(out, "# dim {m}\n# noise_dim {d}");
        let mut cols = vec!["t".to_string()];
        cols.extend((1..=m).map(|a| format!("y{a}")));
        for a in 1..=m {
            for b in 1..=d {
                cols.push(format!("dy{a}{b}"));
            }
        }
        let _ = writeln!(out, "{}", cols.join(","));
        for (k, t) in self.grid.points().iter().enumerate() {
            let _ = write!(out, "{t:?}");
            for v in self.value(k).iter().chain(self.derivative(k)) {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }
}
