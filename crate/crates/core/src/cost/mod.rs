//! Monte-Carlo estimates of discounted and finite-horizon costs of a fixed
//! feedback policy under any noise family.
//!
//! Path `p` of every run uses the draw keyed by `(noise.seed, first_path + p)`,
//! so two runs with the same seed are coupled path by path (common random
//! numbers), whatever the noise family.

mod fingerprint;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::hjb::ModelSpec;
use crate::noise::NoiseSpec;
use crate::policy::LipschitzPolicy;
use crate::rde::{escaped, DavieStepper, Feedback, SolverOptions};
use crate::rough::RoughPath;
use crate::stats::mean_and_se;

pub use fingerprint::{model_fingerprint, noise_fingerprint, policy_fingerprint};

/// Largest tolerated fraction of divergent paths.
pub const MAX_EXCLUDED_FRACTION: f64 = 1e-3;

/// Which lift of each path drives the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Draw {
    /// The noise family's own lift.
    #[default]
    Lift,
    /// The coupled Stratonovich Brownian lift the family approximates.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSetup {
    pub x0: f64,
    pub n_paths: usize,
    pub steps_per_unit: usize,
    pub draw: Draw,
    /// Drive with `-X` instead of `X` (a mirrored coupling).
    pub mirror: bool,
    pub first_path: u64,
    pub solver: SolverOptions,
}

impl CostSetup {
    pub fn new(x0: f64, n_paths: usize, steps_per_unit: usize) -> Self {
        Self {
            x0,
            n_paths,
            steps_per_unit,
            draw: Draw::Lift,
            mirror: false,
            first_path: 0,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprints {
    pub model: String,
    pub noise: String,
    pub policy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// `M e^{-αT} / α` for discounted runs, `0` for finite-horizon runs.
    pub truncation_bound: f64,
    pub seed: u64,
    pub excluded: usize,
    pub fingerprints: Fingerprints,
    /// Per-path costs in path order (excluded paths omitted).
    #[serde(skip)]
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostGap {
    pub gap: f64,
    pub combined_se: f64,
    /// `gap > 3 · combined_se`.
    pub significant: bool,
}

pub fn cost_gap(a: &CostEstimate, b: &CostEstimate) -> CostGap {
    let gap = (a.mean - b.mean).abs();
    let combined_se = a.std_error.hypot(b.std_error);
    CostGap {
        gap,
        combined_se,
        significant: gap > 3.0 * combined_se,
    }
}

/// Horizon at which the discounted tail `M e^{-αT} / α` drops to `tol`.
pub fn truncation_horizon(cost_bound: f64, discount: f64, tol: f64) -> f64 {
    ((cost_bound / (discount * tol)).ln() / discount).max(0.0)
}

pub fn truncation_bound(cost_bound: f64, discount: f64, horizon: f64) -> f64 {
    cost_bound * (-discount * horizon).exp() / discount
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Criterion {
    Discounted,
    Finite,
}

/// `∫_0^T e^{-αt} c(Y_t, u_t) dt` along one driver: trapezoid rule in `c` on
/// the driver's grid, with the discount factor integrated exactly per cell.
pub fn discounted_path_cost(
    ms: &ModelSpec,
    policy: Option<&dyn Feedback>,
    drv: &RoughPath,
    x0: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    path_cost(ms, policy, drv, x0, opts, Criterion::Discounted)
}

/// `∫_0^T c(Y_t, u_t) dt + H(Y_T)` along one driver.
pub fn finite_horizon_path_cost(
    ms: &ModelSpec,
    policy: Option<&dyn Feedback>,
    drv: &RoughPath,
    x0: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    path_cost(ms, policy, drv, x0, opts, Criterion::Finite)
}

/// `∫_a^b e^{-αs} ds`.
fn discount_weight(alpha: f64, a: f64, b: f64) -> f64 {
    if alpha == 0.0 {
        b - a
    } else {
        (-alpha * a).exp() * -(-alpha * (b - a)).exp_m1() / alpha
    }
}

fn path_cost(
    ms: &ModelSpec,
    policy: Option<&dyn Feedback>,
    drv: &RoughPath,
    x0: f64,
    opts: &SolverOptions,
    criterion: Criterion,
) -> Result<f64> {
    if drv.dim() != 1 {
        return Err(Error::Mismatch(format!("scalar models need a 1-d driver, got d = {}", drv.dim())));
    }
    let grid = drv.grid();
    let t = grid.points();
    let alpha = match criterion {
        Criterion::Discounted => ms.discount,
        Criterion::Finite => 0.0,
    };
    let mut stepper = DavieStepper::new(ms);
    let mut y = [x0];
    let mut u = policy.map_or(0.0, |p| p.action(t[0], &y));
    let mut left = (ms.running_cost)(y[0], u);
    let mut total = 0.0;
    for k in 0..grid.cells() {
        let dt = grid.step(k);
        stepper.step(ms, &mut y, u, dt, drv.cell_increment(k), drv.cell_second_level(k));
        if let Some(magnitude) = escaped(&y, opts.guard) {
            return Err(Error::Divergence { step: k + 1, magnitude });
        }
        u = policy.map_or(0.0, |p| p.action(t[k + 1], &y));
        let right = (ms.running_cost)(y[0], u);
        total += 0.5 * discount_weight(alpha, t[k], t[k + 1]) * (left + right);
        left = right;
    }
    if criterion == Criterion::Finite {
        total += (ms.terminal_cost)(y[0]);
    }
    Ok(total)
}

fn estimate(
    ms: &ModelSpec,
    noise: &NoiseSpec,
    policy: Option<&LipschitzPolicy>,
    horizon: f64,
    setup: &CostSetup,
    criterion: Criterion,
) -> Result<CostEstimate> {
    noise.validate()?;
    if noise.dim != 1 {
        return Err(Error::param("dim", "scalar models take one noise coordinate"));
    }
    if setup.n_paths == 0 || setup.steps_per_unit == 0 {
        return Err(Error::param("n_paths", "need at least one path and one step per unit time"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param("horizon", "must be positive"));
    }
    if !setup.x0.is_finite() {
        return Err(Error::NonFinite { what: "initial state", index: 0 });
    }
    let cells = (horizon * setup.steps_per_unit as f64 - 1e-9).ceil().max(1.0) as usize;
    let grid = TimeGrid::uniform(0.0, horizon, cells)?;
    let feedback = policy.map(|p| p as &dyn Feedback);
    let per_path: Vec<Result<f64>> = (0..setup.n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let path = setup.first_path + p;
            let mut drv = match setup.draw {
                Draw::Lift => noise.lift(&grid, path)?,
                Draw::Reference => noise.reference_lift(&grid, path)?,
            };
            if setup.mirror {
                drv = drv.dilate(-1.0)?;
            }
            path_cost(ms, feedback, &drv, setup.x0, &setup.solver, criterion)
        })
        .collect();
    let mut samples = Vec::with_capacity(per_path.len());
    let mut excluded = 0;
    for r in per_path {
        match r {
            Ok(v) => samples.push(v),
            Err(Error::Divergence { .. }) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    if excluded as f64 > MAX_EXCLUDED_FRACTION * setup.n_paths as f64 || samples.is_empty() {
        return Err(Error::TooManyDivergences {
            excluded,
            total: setup.n_paths,
        });
    }
    let (mean, std_error) = mean_and_se(&samples);
    Ok(CostEstimate {
        mean,
        std_error,
        n_paths: samples.len(),
        truncation_bound: match criterion {
            Criterion::Discounted => truncation_bound(ms.cost_bound, ms.discount, horizon),
            Criterion::Finite => 0.0,
        },
        seed: noise.seed,
        excluded,
        fingerprints: Fingerprints {
            model: model_fingerprint(ms),
            noise: noise_fingerprint(noise),
            policy: policy.map_or_else(|| "none".to_string(), policy_fingerprint),
        },
        samples,
    })
}

/// Discounted cost truncated at `horizon`; the neglected tail is at most
/// `truncation_bound`.
pub fn discounted_cost(
    ms: &ModelSpec,
    noise: &NoiseSpec,
    policy: Option<&LipschitzPolicy>,
    horizon: f64,
    setup: &CostSetup,
) -> Result<CostEstimate> {
    estimate(ms, noise, policy, horizon, setup, Criterion::Discounted)
}

pub fn finite_horizon_cost(
    ms: &ModelSpec,
    noise: &NoiseSpec,
    policy: Option<&LipschitzPolicy>,
    horizon: f64,
    setup: &CostSetup,
) -> Result<CostEstimate> {
    estimate(ms, noise, policy, horizon, setup, Criterion::Finite)
}
