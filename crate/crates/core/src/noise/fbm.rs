//! Fractional Brownian motion by circulant embedding of fractional Gaussian noise.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::rough::{lift_piecewise_linear, RoughPath};

use super::rng::{normal, substream, Purpose};

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let k = k as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// `½(t^{2H} + s^{2H} - |t - s|^{2H})`.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (t.abs().powf(h2) + s.abs().powf(h2) - (t - s).abs().powf(h2))
}

/// Square roots of the circulant eigenvalues for a fixed `(H, N)`, with the
/// FFT plan they are used with.
#[derive(Clone)]
pub struct FbmSampler {
    hurst: f64,
    cells: usize,
    step_scale: f64,
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmSampler")
            .field("hurst", &self.hurst)
            .field("cells", &self.cells)
            .finish()
    }
}

impl FbmSampler {
    pub fn new(hurst: f64, grid: &TimeGrid) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::param("hurst", "must lie in (0, 1)"));
        }
        if !grid.is_uniform(1e-9) {
            return Err(Error::InvalidGrid("circulant embedding needs a uniform grid".into()));
        }
        let n = grid.cells();
        let len = 2 * n;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let mut row: Vec<Complex64> = (0..len)
            .map(|k| Complex64::new(fgn_autocovariance(hurst, k.min(len - k)), 0.0))
            .collect();
        fft.process(&mut row);
        let peak = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        let mut sqrt_eig = Vec::with_capacity(len);
        for (k, c) in row.iter().enumerate() {
            if c.re < -1e-10 * peak {
                return Err(Error::NotPositiveDefinite { index: k, value: c.re });
            }
            sqrt_eig.push((c.re.max(0.0) / len as f64).sqrt());
        }
        let mesh = grid.horizon() / n as f64;
        Ok(Self {
            hurst,
            cells: n,
            step_scale: mesh.powf(hurst),
            sqrt_eig,
            fft,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Increments over the grid cells from `2N` complex standard normals.
    /// The same noise fed to samplers with different `H` gives coupled paths.
    pub fn increments(&self, noise: &[Complex64]) -> Vec<f64> {
        assert_eq!(noise.len(), 2 * self.cells);
        let mut buf: Vec<Complex64> = noise.iter().zip(&self.sqrt_eig).map(|(z, s)| z * s).collect();
        self.fft.process(&mut buf);
        buf[..self.cells].iter().map(|c| c.re * self.step_scale).collect()
    }
}

/// `2N` complex standard normals (real and imaginary parts independent N(0,1)).
pub fn spectral_noise(cells: usize, seed: u64, path: u64, lane: u64) -> Vec<Complex64> {
    let mut rng = substream(seed, path, Purpose::Spectral, lane);
    (0..2 * cells)
        .map(|_| {
            let re = normal(&mut rng);
            Complex64::new(re, normal(&mut rng))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FbmSample {
    grid: TimeGrid,
    dim: usize,
    hurst: f64,
    values: Vec<f64>,
}

impl FbmSample {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// `(N+1) × dim`, starting at the origin.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn sample_fbm(hurst: f64, grid: &TimeGrid, dim: usize, seed: u64) -> Result<FbmSample> {
    sample_fbm_path(&FbmSampler::new(hurst, grid)?, grid, dim, seed, 0)
}

pub fn sample_fbm_path(sampler: &FbmSampler, grid: &TimeGrid, dim: usize, seed: u64, path: u64) -> Result<FbmSample> {
    if dim == 0 || dim > 255 {
        return Err(Error::param("dim", "must be in 1..=255"));
    }
    if grid.cells() != sampler.cells {
        return Err(Error::Mismatch("sampler was built for a different grid".into()));
    }
    let n = grid.cells();
    let mut values = vec![0.0; (n + 1) * dim];
    for a in 0..dim {
        let inc = sampler.increments(&spectral_noise(n, seed, path, a as u64));
        for (k, dx) in inc.iter().enumerate() {
            values[(k + 1) * dim + a] = values[k * dim + a] + dx;
        }
    }
    Ok(FbmSample {
        grid: grid.clone(),
        dim,
        hurst: sampler.hurst,
        values,
    })
}

/// Piecewise-linear lift; geometric, and a valid level-2 lift for `H > 1/3`.
pub fn fbm_lift(sample: &FbmSample, hoelder: f64) -> Result<RoughPath> {
    if !(sample.hurst > 1.0 / 3.0 && sample.hurst < 1.0) {
        return Err(Error::param("hurst", "level-2 lift needs H in (1/3, 1)"));
    }
    lift_piecewise_linear(&sample.values, sample.dim, &sample.grid, hoelder)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_gives_white_noise() {
        assert!((fgn_autocovariance(0.5, 0) - 1.0).abs() < 1e-15);
        assert!(fgn_autocovariance(0.5, 3).abs() < 1e-15);
        assert!((fbm_covariance(0.5, 0.3, 0.7) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn covariance_formula_value() {
        let c = fbm_covariance(0.4, 0.3, 0.7);
        assert!((c - 0.5 * (0.7f64.powf(0.8) + 0.3f64.powf(0.8) - 0.4f64.powf(0.8))).abs() < 1e-15);
        assert!((c - 0.32647).abs() < 1e-4);
    }

    #[test]
    fn rejects_nonuniform_grid_and_bad_hurst() {
        let g = TimeGrid::new(vec![0.0, 0.1, 0.3]).unwrap();
        assert!(FbmSampler::new(0.4, &g).is_err());
        let u = TimeGrid::uniform(0.0, 1.0, 4).unwrap();
        assert!(FbmSampler::new(1.2, &u).is_err());
        let s = sample_fbm(0.3, &u, 1, 0).unwrap();
        assert!(fbm_lift(&s, 0.4).is_err());
    }
}
