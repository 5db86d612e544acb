//! TOML experiment configuration.

use serde::{Deserialize, Serialize};

use crate::cost::truncation_horizon;
use crate::error::{Error, Result};
use crate::hjb::ModelPreset;
use crate::noise::{KlScaling, NoiseFamily, NoiseSpec, DEFAULT_FINE_FACTOR, DEFAULT_QUAD_ORDER};
use crate::rough::{PairSet, DEFAULT_HOELDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NoiseConvergence,
    RobustnessSweep,
    HjbSolve,
    EvaluateCost,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    BrownianIto,
    BrownianStrat,
    WongZakai,
    KarhunenLoeve,
    Mollified,
    Fbm,
}

impl FamilyName {
    pub fn has_levels(&self) -> bool {
        !matches!(self, FamilyName::BrownianIto | FamilyName::BrownianStrat)
    }

    pub fn at(&self, level: f64) -> NoiseFamily {
        match self {
            FamilyName::BrownianIto => NoiseFamily::BrownianIto,
            FamilyName::BrownianStrat => NoiseFamily::BrownianStrat,
            FamilyName::WongZakai => NoiseFamily::WongZakai { n: level.round() as usize },
            FamilyName::KarhunenLoeve => NoiseFamily::KarhunenLoeve { n: level.round() as usize },
            FamilyName::Mollified => NoiseFamily::Mollified { bandwidth: level },
            FamilyName::Fbm => NoiseFamily::Fbm { hurst: level },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySweep {
    pub family: FamilyName,
    #[serde(default)]
    pub levels: Vec<f64>,
}

impl FamilySweep {
    /// Levels to run; families without a parameter run once at level `0`.
    pub fn effective_levels(&self) -> Vec<f64> {
        if self.family.has_levels() {
            self.levels.clone()
        } else {
            vec![0.0]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_hoelder")]
    pub hoelder: f64,
    #[serde(default = "default_pairs")]
    pub pairs: PairSet,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            cells: default_cells(),
            hoelder: DEFAULT_HOELDER,
            pairs: PairSet::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default = "one_usize")]
    pub dim: usize,
    #[serde(default = "default_fine_factor")]
    pub fine_factor: usize,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default = "default_scaling")]
    pub kl_scaling: KlScaling,
    #[serde(default)]
    pub families: Vec<FamilySweep>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            dim: 1,
            fine_factor: DEFAULT_FINE_FACTOR,
            quad_order: DEFAULT_QUAD_ORDER,
            kl_scaling: KlScaling::Rescale,
            families: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionName {
    #[default]
    Discounted,
    FiniteHorizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HjbSection {
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_nu")]
    pub nu: usize,
    /// Output time steps of the finite-horizon solver.
    #[serde(default = "default_nt")]
    pub nt: usize,
}

impl Default for HjbSection {
    fn default() -> Self {
        Self {
            nx: default_nx(),
            nu: default_nu(),
            nt: default_nt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PolicySource {
    #[default]
    Hjb,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    #[serde(default)]
    pub source: PolicySource,
    #[serde(default)]
    pub path: Option<String>,
    /// Mollifier half-width applied to an HJB selector; `0` keeps it raw.
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
    /// Largest acceptable certified Lipschitz constant.
    #[serde(default = "default_certify_limit")]
    pub certify_limit: f64,
}

impl Default for PolicySection {
    fn default() -> Self {
        Self {
            source: PolicySource::Hjb,
            path: None,
            bandwidth: default_bandwidth(),
            certify_limit: default_certify_limit(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    #[serde(default)]
    pub criterion: CriterionName,
    #[serde(default = "default_x0")]
    pub x0: f64,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_steps")]
    pub steps_per_unit: usize,
    /// Target for the discounted tail bound; sets the truncation horizon.
    #[serde(default = "default_truncation_tol")]
    pub truncation_tol: f64,
    /// Horizon of finite-horizon runs.
    #[serde(default = "one")]
    pub horizon: f64,
}

impl Default for CostSection {
    fn default() -> Self {
        Self {
            criterion: CriterionName::Discounted,
            x0: default_x0(),
            n_paths: default_paths(),
            steps_per_unit: default_steps(),
            truncation_tol: default_truncation_tol(),
            horizon: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Rough,
    Noise,
    Rde,
    Policy,
    Hjb,
    Cost,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Rough, Suite::Noise, Suite::Rde, Suite::Policy, Suite::Hjb, Suite::Cost];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Rough => "rough",
            Suite::Noise => "noise",
            Suite::Rde => "rde",
            Suite::Policy => "policy",
            Suite::Hjb => "hjb",
            Suite::Cost => "cost",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Injection {
    ChenCorruption,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub inject: Option<Injection>,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            suites: all_suites(),
            inject: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default = "default_model")]
    pub model: ModelPreset,
    #[serde(default)]
    pub hjb: HjbSection,
    #[serde(default)]
    pub policy: PolicySection,
    #[serde(default)]
    pub cost: CostSection,
    #[serde(default)]
    pub validate: ValidateSection,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_cells() -> usize {
    512
}
fn default_hoelder() -> f64 {
    DEFAULT_HOELDER
}
fn default_pairs() -> PairSet {
    PairSet::Auto
}
fn default_fine_factor() -> usize {
    DEFAULT_FINE_FACTOR
}
fn default_quad_order() -> usize {
    DEFAULT_QUAD_ORDER
}
fn default_scaling() -> KlScaling {
    KlScaling::Rescale
}
fn default_nx() -> usize {
    601
}
fn default_nu() -> usize {
    41
}
fn default_nt() -> usize {
    100
}
fn default_bandwidth() -> f64 {
    0.2
}
fn default_certify_limit() -> f64 {
    10.0
}
fn default_x0() -> f64 {
    0.5
}
fn default_paths() -> usize {
    10_000
}
fn default_steps() -> usize {
    1024
}
fn default_truncation_tol() -> f64 {
    1e-6
}
fn all_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}
fn default_seeds() -> Vec<u64> {
    vec![1]
}
fn default_model() -> ModelPreset {
    ModelPreset::Symmetric
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    /// Parses and validates a configuration. Errors name the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| line_of(text, s.start));
            Error::Config(format!("line {line}: {}", e.message()))
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    fn check(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.seeds.is_empty() {
            return fail("`seeds` must not be empty".into());
        }
        if self.grid.cells == 0 || !(self.grid.horizon > 0.0) {
            return fail("[grid] needs positive `horizon` and `cells`".into());
        }
        let needs_families = matches!(
            self.experiment,
            ExperimentKind::NoiseConvergence | ExperimentKind::RobustnessSweep | ExperimentKind::EvaluateCost
        );
        if needs_families && self.noise.families.is_empty() {
            return fail("[noise] needs at least one entry in `families`".into());
        }
        for f in &self.noise.families {
            if f.family.has_levels() && f.levels.is_empty() {
                return fail(format!("family {:?} needs a non-empty `levels` list", f.family));
            }
            for &level in &f.effective_levels() {
                self.noise_spec(f.family.at(level), 0)
                    .validate()
                    .map_err(|e| Error::Config(format!("family {:?} at level {level}: {e}", f.family)))?;
            }
        }
        if self.experiment == ExperimentKind::Validate && self.validate.suites.is_empty() {
            return fail("[validate] `suites` must not be empty".into());
        }
        if self.policy.source == PolicySource::File && self.policy.path.is_none() {
            return fail("[policy] source = \"file\" needs `path`".into());
        }
        if self.cost.n_paths == 0 || self.cost.steps_per_unit == 0 {
            return fail("[cost] needs positive `n_paths` and `steps_per_unit`".into());
        }
        if !(self.cost.truncation_tol > 0.0) {
            return fail("[cost] `truncation_tol` must be positive".into());
        }
        Ok(())
    }

    pub fn noise_spec(&self, family: NoiseFamily, seed: u64) -> NoiseSpec {
        NoiseSpec {
            family,
            dim: self.noise.dim,
            seed,
            fine_factor: self.noise.fine_factor,
            quad_order: self.noise.quad_order,
            hoelder: self.grid.hoelder,
            kl_scaling: self.noise.kl_scaling,
        }
    }

    /// Discounted runs stop where the tail bound reaches the tolerance,
    /// rounded up to a whole time unit.
    pub fn discounted_horizon(&self, cost_bound: f64, discount: f64) -> f64 {
        truncation_horizon(cost_bound, discount, self.cost.truncation_tol).ceil().max(1.0)
    }
}
