//! Brownian noise and its smooth or near-Brownian approximations, each lifted
//! to a rough path.
//!
//! Every family is built from a draw keyed by `(seed, path)`. Lifts of the
//! same key from different families share their underlying Brownian sample,
//! which is what makes pathwise comparisons between them meaningful.

mod brownian;
mod fbm;
mod karhunen_loeve;
mod mollified;
pub(crate) mod rng;
mod wong_zakai;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::rough::{check_hoelder, lift_piecewise_linear, RoughPath, DEFAULT_HOELDER};

pub use brownian::{brownian_lift, sample_brownian, sample_brownian_path, BrownianSample, Interpretation};
pub use fbm::{
    fbm_covariance, fbm_lift, fgn_autocovariance, sample_fbm, sample_fbm_path, spectral_noise, FbmSample, FbmSampler,
};
pub use karhunen_loeve::{
    coupled_brownian_value, karhunen_loeve_lift, karhunen_loeve_lift_of, karhunen_loeve_path,
    karhunen_loeve_reference, KarhunenLoeve, KlScaling,
};
pub use mollified::{mollified_lift, MollifiedPath};
pub use wong_zakai::{interpolate_linear, wong_zakai_lift};

pub const DEFAULT_FINE_FACTOR: usize = 32;
pub const DEFAULT_QUAD_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum NoiseFamily {
    BrownianIto,
    BrownianStrat,
    WongZakai { n: usize },
    KarhunenLoeve { n: usize },
    Mollified { bandwidth: f64 },
    Fbm { hurst: f64 },
}

impl NoiseFamily {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseFamily::BrownianIto => "brownian-ito",
            NoiseFamily::BrownianStrat => "brownian-strat",
            NoiseFamily::WongZakai { .. } => "wong-zakai",
            NoiseFamily::KarhunenLoeve { .. } => "karhunen-loeve",
            NoiseFamily::Mollified { .. } => "mollified",
            NoiseFamily::Fbm { .. } => "fbm",
        }
    }

    /// The approximation parameter, if the family has one.
    pub fn level(&self) -> Option<f64> {
        match *self {
            NoiseFamily::WongZakai { n } | NoiseFamily::KarhunenLoeve { n } => Some(n as f64),
            NoiseFamily::Mollified { bandwidth } => Some(bandwidth),
            NoiseFamily::Fbm { hurst } => Some(hurst),
            _ => None,
        }
    }

    /// Same family with its approximation parameter replaced.
    pub fn at_level(&self, level: f64) -> NoiseFamily {
        match *self {
            NoiseFamily::WongZakai { .. } => NoiseFamily::WongZakai { n: level.round() as usize },
            NoiseFamily::KarhunenLoeve { .. } => NoiseFamily::KarhunenLoeve { n: level.round() as usize },
            NoiseFamily::Mollified { .. } => NoiseFamily::Mollified { bandwidth: level },
            NoiseFamily::Fbm { .. } => NoiseFamily::Fbm { hurst: level },
            other => other,
        }
    }

    pub fn is_ito(&self) -> bool {
        matches!(self, NoiseFamily::BrownianIto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub family: NoiseFamily,
    pub dim: usize,
    pub seed: u64,
    #[serde(default = "default_fine_factor")]
    pub fine_factor: usize,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default = "default_hoelder")]
    pub hoelder: f64,
    #[serde(default = "default_scaling")]
    pub kl_scaling: KlScaling,
}

fn default_fine_factor() -> usize {
    DEFAULT_FINE_FACTOR
}

fn default_quad_order() -> usize {
    DEFAULT_QUAD_ORDER
}

fn default_hoelder() -> f64 {
    DEFAULT_HOELDER
}

fn default_scaling() -> KlScaling {
    KlScaling::Rescale
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, dim: usize, seed: u64) -> Self {
        Self {
            family,
            dim,
            seed,
            fine_factor: DEFAULT_FINE_FACTOR,
            quad_order: DEFAULT_QUAD_ORDER,
            hoelder: DEFAULT_HOELDER,
            kl_scaling: KlScaling::Rescale,
        }
    }

    pub fn with_family(&self, family: NoiseFamily) -> Self {
        Self { family, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            NoiseFamily::WongZakai { n } | NoiseFamily::KarhunenLoeve { n } if n == 0 => {
                return Err(Error::param("n", "must be at least 1"))
            }
            NoiseFamily::Mollified { bandwidth } if !(bandwidth > 0.0 && bandwidth.is_finite()) => {
                return Err(Error::param("bandwidth", "must be positive"))
            }
            NoiseFamily::Fbm { hurst } if !(hurst > 1.0 / 3.0 && hurst < 1.0) => {
                return Err(Error::param("hurst", "must lie in (1/3, 1)"))
            }
            _ => {}
        }
        if self.dim == 0 || self.dim > 255 {
            return Err(Error::param("dim", "must be in 1..=255"));
        }
        if self.fine_factor == 0 {
            return Err(Error::param("fine_factor", "must be at least 1"));
        }
        if self.quad_order < 2 {
            return Err(Error::param("quad_order", "must be at least 2"));
        }
        check_hoelder(self.hoelder)
    }

    /// The Brownian draw underlying every family for this `(seed, path)`.
    pub fn brownian(&self, grid: &TimeGrid, path: u64) -> Result<BrownianSample> {
        sample_brownian_path(grid, self.dim, self.seed, path)
    }

    /// Lift of path number `path` of this family on `grid`.
    pub fn lift(&self, grid: &TimeGrid, path: u64) -> Result<RoughPath> {
        self.validate()?;
        let m = self.fine_factor;
        match self.family {
            NoiseFamily::BrownianIto => brownian_lift(&self.brownian(grid, path)?, Interpretation::Ito, m, self.hoelder),
            NoiseFamily::BrownianStrat => {
                brownian_lift(&self.brownian(grid, path)?, Interpretation::Stratonovich, m, self.hoelder)
            }
            NoiseFamily::WongZakai { n } => {
                let stride = wong_zakai_stride(grid, n)?;
                let coarse = self.brownian(grid, path)?.subsample(stride)?;
                wong_zakai_lift(&coarse, grid, self.hoelder)
            }
            NoiseFamily::Mollified { bandwidth } => {
                let fine = self.brownian(grid, path)?.bridge_refine(m)?;
                mollified_lift(&fine, bandwidth, grid, self.quad_order, self.hoelder)
            }
            NoiseFamily::KarhunenLoeve { n } => {
                let horizon = karhunen_loeve::expansion_horizon(grid, self.kl_scaling)?;
                let kl = KarhunenLoeve::sample(n, self.dim, self.seed, path)?.rescaled(horizon)?;
                karhunen_loeve_lift_of(&kl, grid, self.quad_order, self.hoelder)
            }
            NoiseFamily::Fbm { hurst } => self.fbm_coarse_lift(grid, path, hurst),
        }
    }

    /// Stratonovich Brownian lift coupled to [`NoiseSpec::lift`] for the same
    /// path: the limit the family approximates.
    pub fn reference_lift(&self, grid: &TimeGrid, path: u64) -> Result<RoughPath> {
        self.validate()?;
        match self.family {
            NoiseFamily::KarhunenLoeve { .. } => karhunen_loeve_reference(
                grid,
                self.dim,
                self.seed,
                path,
                self.fine_factor,
                self.kl_scaling,
                self.hoelder,
            ),
            NoiseFamily::Fbm { .. } => self.fbm_coarse_lift(grid, path, 0.5),
            _ => brownian_lift(
                &self.brownian(grid, path)?,
                Interpretation::Stratonovich,
                self.fine_factor,
                self.hoelder,
            ),
        }
    }

    fn fbm_coarse_lift(&self, grid: &TimeGrid, path: u64, hurst: f64) -> Result<RoughPath> {
        let fine = grid.refine(self.fine_factor)?;
        let sampler = FbmSampler::new(hurst, &fine)?;
        let sample = sample_fbm_path(&sampler, &fine, self.dim, self.seed, path)?;
        lift_piecewise_linear(sample.values(), self.dim, &fine, self.hoelder)?.coarsen(self.fine_factor)
    }
}

/// Number of output cells per interpolation cell of width `1/n`.
fn wong_zakai_stride(grid: &TimeGrid, n: usize) -> Result<usize> {
    let coarse = grid.horizon() * n as f64;
    let cells = coarse.round() as usize;
    if cells == 0 || (coarse - cells as f64).abs() > 1e-9 * coarse.max(1.0) || grid.cells() % cells != 0 {
        return Err(Error::InvalidGrid(format!(
            "interpolation step 1/{n} does not align with a grid of {} cells on [{}, {}]",
            grid.cells(),
            grid.start(),
            grid.end()
        )));
    }
    Ok(grid.cells() / cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parses_from_toml() {
        let spec: NoiseSpec = toml::from_str("family = \"wong-zakai\"\nn = 16\ndim = 2\nseed = 3\n").unwrap();
        assert_eq!(spec.family, NoiseFamily::WongZakai { n: 16 });
        assert_eq!(spec.fine_factor, DEFAULT_FINE_FACTOR);
    }

    #[test]
    fn invariants_enforced() {
        for fam in [
            NoiseFamily::WongZakai { n: 0 },
            NoiseFamily::Mollified { bandwidth: 0.0 },
            NoiseFamily::Fbm { hurst: 0.3 },
        ] {
            assert!(NoiseSpec::new(fam, 1, 0).validate().is_err());
        }
        let mut s = NoiseSpec::new(NoiseFamily::BrownianIto, 1, 0);
        s.fine_factor = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn wong_zakai_alignment() {
        let grid = TimeGrid::uniform(0.0, 2.0, 64).unwrap();
        assert_eq!(wong_zakai_stride(&grid, 8).unwrap(), 4);
        assert!(wong_zakai_stride(&grid, 3).is_err());
        assert!(wong_zakai_stride(&grid, 64).is_err());
    }

    #[test]
    fn families_share_the_brownian_draw() {
        let grid = TimeGrid::uniform(0.0, 1.0, 32).unwrap();
        let base = NoiseSpec::new(NoiseFamily::BrownianStrat, 2, 21);
        let a = base.brownian(&grid, 4).unwrap();
        let b = base.with_family(NoiseFamily::WongZakai { n: 8 }).brownian(&grid, 4).unwrap();
        assert_eq!(a.values(), b.values());
        let wz = base.with_family(NoiseFamily::WongZakai { n: 32 }).lift(&grid, 4).unwrap();
        assert_eq!(&wz.values()[..], &a.values()[..]);
    }
}
