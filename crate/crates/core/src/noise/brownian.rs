//! Brownian samples, Brownian-bridge refinement, and Itô / Stratonovich lifts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::rough::{lift_piecewise_linear, RoughPath};

use super::rng::{normal, substream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpretation {
    Ito,
    Stratonovich,
}

/// A `d`-dimensional Brownian motion started at zero, sampled on a grid.
///
/// Keeps the `(seed, path)` it was drawn from so that refinements are
/// reproducible and shared by every lift built on top of it.
#[derive(Debug, Clone)]
pub struct BrownianSample {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
    seed: u64,
    path: u64,
}

/// Path `0` of the stream keyed by `seed`.
pub fn sample_brownian(grid: &TimeGrid, dim: usize, seed: u64) -> Result<BrownianSample> {
    sample_brownian_path(grid, dim, seed, 0)
}

/// Independent Gaussian increments with variance equal to the cell length.
pub fn sample_brownian_path(grid: &TimeGrid, dim: usize, seed: u64, path: u64) -> Result<BrownianSample> {
    if dim == 0 {
        return Err(Error::param("dim", "must be positive"));
    }
    let mut rng = substream(seed, path, Purpose::Brownian, 0);
    let n = grid.cells();
    let mut values = vec![0.0; (n + 1) * dim];
    for k in 0..n {
        let sd = grid.step(k).sqrt();
        for a in 0..dim {
            values[(k + 1) * dim + a] = values[k * dim + a] + sd * normal(&mut rng);
        }
    }
    Ok(BrownianSample {
        grid: grid.clone(),
        dim,
        values,
        seed,
        path,
    })
}

impl BrownianSample {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(N+1) × dim` values, row-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Fills every cell with `factor - 1` interior points drawn from the
    /// Brownian bridge between its endpoints. Existing values are kept bit-exact.
    pub fn bridge_refine(&self, factor: usize) -> Result<BrownianSample> {
        let grid = self.grid.refine(factor)?;
        if factor == 1 {
            return Ok(BrownianSample { grid, ..self.clone() });
        }
        let d = self.dim;
        let fine = grid.points();
        let mut rng = substream(self.seed, self.path, Purpose::Bridge, 0);
        let mut values = vec![0.0; (grid.cells() + 1) * d];
        for k in 0..self.grid.cells() {
            let end_t = self.grid.points()[k + 1];
            let base = k * factor;
            values[base * d..(base + 1) * d].copy_from_slice(self.value(k));
            for j in 1..factor {
                let (s_prev, s) = (fine[base + j - 1], fine[base + j]);
                let remaining = end_t - s_prev;
                let frac = (s - s_prev) / remaining;
                let sd = ((s - s_prev) * (end_t - s) / remaining).sqrt();
                for a in 0..d {
                    let prev = values[(base + j - 1) * d + a];
                    let target = self.values[(k + 1) * d + a];
                    values[(base + j) * d + a] = prev + (target - prev) * frac + sd * normal(&mut rng);
                }
            }
        }
        let last = grid.cells();
        values[last * d..].copy_from_slice(self.value(self.grid.cells()));
        Ok(BrownianSample {
            grid,
            dim: d,
            values,
            seed: self.seed,
            path: self.path,
        })
    }

    /// Keeps every `stride`-th point.
    pub fn subsample(&self, stride: usize) -> Result<BrownianSample> {
        let grid = self.grid.coarsen(stride)?;
        let d = self.dim;
        let values = (0..=grid.cells())
            .flat_map(|k| self.value(k * stride).to_vec())
            .collect();
        Ok(BrownianSample {
            grid,
            dim: d,
            values,
            seed: self.seed,
            path: self.path,
        })
    }
}

/// Lifts a Brownian sample to a rough path on its own grid.
///
/// In one dimension the cell values are exact: `𝕏^{Itô} = ½(X² - Δt)` and
/// `𝕏^{Strat} = ½X²`. In higher dimension the Stratonovich cell value is the
/// piecewise-linear lift of a `fine_factor`-times bridge refinement of the
/// cell; the Itô value subtracts `½ Δt I` from it.
pub fn brownian_lift(
    sample: &BrownianSample,
    interpretation: Interpretation,
    fine_factor: usize,
    hoelder: f64,
) -> Result<RoughPath> {
    if fine_factor == 0 {
        return Err(Error::param("fine_factor", "must be at least 1"));
    }
    let strat = if sample.dim == 1 {
        lift_piecewise_linear(&sample.values, 1, &sample.grid, hoelder)?
    } else {
        let fine = sample.bridge_refine(fine_factor)?;
        lift_piecewise_linear(&fine.values, fine.dim, &fine.grid, hoelder)?.coarsen(fine_factor)?
    };
    match interpretation {
        Interpretation::Stratonovich => Ok(strat),
        Interpretation::Ito if sample.dim == 1 => {
            let n = sample.grid.cells();
            let mut second = Vec::with_capacity(n);
            for k in 0..n {
                let x = strat.cell_increment(k)[0];
                second.push(0.5 * (x * x - sample.grid.step(k)));
            }
            RoughPath::from_cells(sample.grid.clone(), 1, strat.increments().to_vec(), second, hoelder)
        }
        Interpretation::Ito => strat.stratonovich_to_ito(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let grid = TimeGrid::uniform(0.0, 1.0, 64).unwrap();
        let a = sample_brownian(&grid, 2, 7).unwrap();
        let b = sample_brownian(&grid, 2, 7).unwrap();
        let c = sample_brownian(&grid, 2, 8).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert_eq!(a.value(0), &[0.0, 0.0]);
    }

    #[test]
    fn refinement_keeps_coarse_points() {
        let grid = TimeGrid::uniform(0.0, 1.0, 8).unwrap();
        let a = sample_brownian(&grid, 2, 3).unwrap();
        let f = a.bridge_refine(4).unwrap();
        assert_eq!(f.grid().cells(), 32);
        for k in 0..=8 {
            assert_eq!(f.value(4 * k), a.value(k));
        }
        assert_eq!(f.subsample(4).unwrap().values(), a.values());
        assert_eq!(a.bridge_refine(4).unwrap().values(), f.values());
    }

    #[test]
    fn one_dimensional_ito_cell_value() {
        let grid = TimeGrid::new(vec![0.0, 0.25]).unwrap();
        let sample = BrownianSample {
            grid,
            dim: 1,
            values: vec![0.0, 0.3],
            seed: 0,
            path: 0,
        };
        let ito = brownian_lift(&sample, Interpretation::Ito, 1, 0.4).unwrap();
        assert!((ito.cell_second_level(0)[0] - (-0.08)).abs() < 1e-15);
        let strat = brownian_lift(&sample, Interpretation::Stratonovich, 1, 0.4).unwrap();
        assert!((strat.cell_second_level(0)[0] - ito.cell_second_level(0)[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn zero_fine_factor_rejected() {
        let grid = TimeGrid::uniform(0.0, 1.0, 4).unwrap();
        let s = sample_brownian(&grid, 1, 1).unwrap();
        assert!(brownian_lift(&s, Interpretation::Ito, 0, 0.4).is_err());
    }
}
