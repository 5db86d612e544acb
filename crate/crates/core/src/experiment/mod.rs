//! Configuration-driven runs: lift convergence tables, policy robustness
//! sweeps, HJB solves, cost evaluation and the self-test suites.

mod config;
mod validate;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::cost::{cost_gap, discounted_cost, finite_horizon_cost, CostEstimate, CostSetup, Draw};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::hjb::{hjb_residual, solve_discounted, solve_finite_horizon, ModelSpec, Stencil, ValueFunction};
use crate::noise::NoiseSpec;
use crate::policy::{read_policy, LipschitzCheck, LipschitzPolicy};
use crate::rough::{rough_distance, sup_distance};
use crate::stats::median;

pub use config::{
    CostSection, CriterionName, ExperimentConfig, ExperimentKind, FamilyName, FamilySweep, GridSection, HjbSection,
    Injection, NoiseSection, PolicySection, PolicySource, Suite, ValidateSection,
};
pub use validate::{run_validate, CheckOutcome, SuiteOutcome, ValidateReport};

/// Pairs sampled when checking a policy's Lipschitz certificate.
pub const LIPSCHITZ_PAIRS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub family: &'static str,
    pub level: f64,
    pub seed: u64,
    pub alpha: f64,
    pub rho: f64,
    pub sup: f64,
}

/// Median of a statistic over seeds at one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelMedian {
    pub family: &'static str,
    pub level: f64,
    pub median: f64,
}

/// `true` when every value is below its predecessor.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

fn cells(cfg: &ExperimentConfig) -> Vec<(FamilyName, f64, u64)> {
    let mut out = Vec::new();
    for sweep in &cfg.noise.families {
        for level in sweep.effective_levels() {
            for &seed in &cfg.seeds {
                out.push((sweep.family, level, seed));
            }
        }
    }
    out
}

/// Rough and uniform distance of each family's lift to its coupled
/// Stratonovich reference, one row per family × level × seed.
pub fn run_noise_convergence(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    let grid = TimeGrid::uniform(0.0, cfg.grid.horizon, cfg.grid.cells)?;
    cells(cfg)
        .into_par_iter()
        .map(|(family, level, seed)| {
            let spec = cfg.noise_spec(family.at(level), seed);
            let lift = spec.lift(&grid, 0)?;
            let reference = spec.reference_lift(&grid, 0)?;
            Ok(ConvergenceRow {
                family: spec.family.name(),
                level,
                seed,
                alpha: cfg.grid.hoelder,
                rho: rough_distance(&lift, &reference, cfg.grid.pairs)?.total(),
                sup: sup_distance(&lift, &reference)?,
            })
        })
        .collect()
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("family,level,seed,alpha,rho,sup\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{},{}", r.family, r.level, r.seed, r.alpha, r.rho, r.sup);
    }
    s
}

fn medians<T>(rows: &[T], key: impl Fn(&T) -> (&'static str, f64), value: impl Fn(&T) -> f64) -> Vec<LevelMedian> {
    let mut out: Vec<LevelMedian> = Vec::new();
    let mut groups: Vec<((&'static str, f64), Vec<f64>)> = Vec::new();
    for r in rows {
        let k = key(r);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(value(r)),
            None => groups.push((k, vec![value(r)])),
        }
    }
    for ((family, level), v) in groups {
        out.push(LevelMedian {
            family,
            level,
            median: median(&v),
        });
    }
    out
}

pub fn convergence_medians(rows: &[ConvergenceRow]) -> Vec<LevelMedian> {
    medians(rows, |r| (r.family, r.level), |r| r.rho)
}

/// Families whose median distance is strictly decreasing along their levels.
pub fn decreasing_by_family(medians: &[LevelMedian]) -> Vec<(&'static str, bool)> {
    let mut names: Vec<&'static str> = Vec::new();
    for m in medians {
        if !names.contains(&m.family) {
            names.push(m.family);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let seq: Vec<f64> = medians.iter().filter(|m| m.family == name).map(|m| m.median).collect();
            (name, strictly_decreasing(&seq))
        })
        .collect()
}

/// The HJB solution for the configured criterion.
pub fn solve_model(cfg: &ExperimentConfig, ms: &ModelSpec) -> Result<ValueFunction> {
    match cfg.cost.criterion {
        CriterionName::Discounted => solve_discounted(ms, cfg.hjb.nx, cfg.hjb.nu),
        CriterionName::FiniteHorizon => solve_finite_horizon(ms, cfg.cost.horizon, cfg.hjb.nt, cfg.hjb.nx, cfg.hjb.nu),
    }
}

#[derive(Debug, Clone)]
pub struct PreparedPolicy {
    pub policy: LipschitzPolicy,
    pub raw_slope: f64,
    pub check: LipschitzCheck,
    pub value: Option<ValueFunction>,
}

/// Loads or derives the policy and certifies it: the certified constant
/// must not exceed the configured limit and must hold on sampled pairs.
pub fn prepare_policy(cfg: &ExperimentConfig, ms: &ModelSpec) -> Result<PreparedPolicy> {
    let (policy, raw_slope, value) = match cfg.policy.source {
        PolicySource::File => {
            let path = cfg.policy.path.as_deref().unwrap_or_default();
            let p = read_policy(&std::fs::read_to_string(path)?)?;
            let raw = p.raw_state_slope().max(p.raw_time_slope());
            (p, raw, None)
        }
        PolicySource::Hjb => {
            let v = solve_model(cfg, ms)?;
            let raw = v.to_policy(ms.actions)?;
            let raw_slope = raw.raw_state_slope().max(raw.raw_time_slope());
            let p = if cfg.policy.bandwidth > 0.0 {
                raw.mollify(cfg.policy.bandwidth)?
            } else {
                raw
            };
            (p, raw_slope, Some(v))
        }
    };
    policy.certify(cfg.policy.certify_limit)?;
    let seed = cfg.seeds[0];
    let check = policy.check_lipschitz(LIPSCHITZ_PAIRS, seed);
    if !check.passed {
        return Err(Error::Certification {
            constant: check.worst_ratio,
            limit: check.constant,
        });
    }
    Ok(PreparedPolicy {
        policy,
        raw_slope,
        check,
        value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessRow {
    pub family: &'static str,
    pub level: f64,
    pub seed: u64,
    pub j_true: f64,
    pub se_true: f64,
    pub j_ideal: f64,
    pub se_ideal: f64,
    pub gap: f64,
    pub combined_se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    pub criterion: CriterionName,
    pub horizon: f64,
    pub truncation_bound: f64,
    pub certified_lipschitz: f64,
    pub raw_selector_slope: f64,
    pub sampled_lipschitz_ratio: f64,
    pub rows: Vec<RobustnessRow>,
    pub median_gaps: Vec<LevelMedian>,
    pub median_combined_se: Vec<LevelMedian>,
}

impl RobustnessReport {
    /// Per family: median gap strictly decreasing over levels and the last
    /// median gap within `max(3 · median combined SE, 0.01)`.
    pub fn family_checks(&self) -> Vec<(&'static str, bool)> {
        decreasing_by_family(&self.median_gaps)
            .into_iter()
            .map(|(name, decreasing)| {
                let last_gap = self.median_gaps.iter().rev().find(|m| m.family == name).map_or(f64::NAN, |m| m.median);
                let last_se = self
                    .median_combined_se
                    .iter()
                    .rev()
                    .find(|m| m.family == name)
                    .map_or(f64::NAN, |m| m.median);
                (name, decreasing && last_gap <= (3.0 * last_se).max(0.01))
            })
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.family_checks().iter().all(|(_, ok)| *ok)
    }
}

fn evaluate(
    cfg: &ExperimentConfig,
    ms: &ModelSpec,
    spec: &NoiseSpec,
    policy: Option<&LipschitzPolicy>,
    draw: Draw,
) -> Result<CostEstimate> {
    let mut setup = CostSetup::new(cfg.cost.x0, cfg.cost.n_paths, cfg.cost.steps_per_unit);
    setup.draw = draw;
    match cfg.cost.criterion {
        CriterionName::Discounted => {
            let horizon = cfg.discounted_horizon(ms.cost_bound, ms.discount);
            discounted_cost(ms, spec, policy, horizon, &setup)
        }
        CriterionName::FiniteHorizon => finite_horizon_cost(ms, spec, policy, cfg.cost.horizon, &setup),
    }
}

/// Solve → certify → evaluate under the idealised reference and under each
/// approximation level with common random numbers.
pub fn run_robustness(cfg: &ExperimentConfig) -> Result<RobustnessReport> {
    let ms = cfg.model.build();
    let prepared = prepare_policy(cfg, &ms)?;
    let policy = &prepared.policy;
    let mut rows = Vec::new();
    let mut truncation = 0.0;
    for sweep in &cfg.noise.families {
        let levels = sweep.effective_levels();
        let ideals = cfg
            .seeds
            .iter()
            .map(|&seed| {
                let reference = cfg.noise_spec(sweep.family.at(levels[0]), seed);
                evaluate(cfg, &ms, &reference, Some(policy), Draw::Reference)
            })
            .collect::<Result<Vec<_>>>()?;
        for &level in &levels {
            for (&seed, ideal) in cfg.seeds.iter().zip(&ideals) {
                truncation = ideal.truncation_bound;
                let spec = cfg.noise_spec(sweep.family.at(level), seed);
                let approx = evaluate(cfg, &ms, &spec, Some(policy), Draw::Lift)?;
                let g = cost_gap(&approx, ideal);
                rows.push(RobustnessRow {
                    family: spec.family.name(),
                    level,
                    seed,
                    j_true: approx.mean,
                    se_true: approx.std_error,
                    j_ideal: ideal.mean,
                    se_ideal: ideal.std_error,
                    gap: g.gap,
                    combined_se: g.combined_se,
                });
            }
        }
    }
    let horizon = match cfg.cost.criterion {
        CriterionName::Discounted => cfg.discounted_horizon(ms.cost_bound, ms.discount),
        CriterionName::FiniteHorizon => cfg.cost.horizon,
    };
    Ok(RobustnessReport {
        criterion: cfg.cost.criterion,
        horizon,
        truncation_bound: truncation,
        certified_lipschitz: prepared.policy.certified_joint(),
        raw_selector_slope: prepared.raw_slope,
        sampled_lipschitz_ratio: prepared.check.worst_ratio,
        median_gaps: medians(&rows, |r| (r.family, r.level), |r| r.gap),
        median_combined_se: medians(&rows, |r| (r.family, r.level), |r| r.combined_se),
        rows,
    })
}

pub fn robustness_csv(rows: &[RobustnessRow]) -> String {
    let mut s = String::from("family,level,seed,J_true,SE_true,J_ideal,SE_ideal,gap,combined_SE\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.family, r.level, r.seed, r.j_true, r.se_true, r.j_ideal, r.se_ideal, r.gap, r.combined_se
        );
    }
    s
}

#[derive(Debug, Clone)]
pub struct HjbOutcome {
    pub value: ValueFunction,
    pub residual_upwind: f64,
    pub residual_centered: f64,
}

pub fn run_hjb(cfg: &ExperimentConfig) -> Result<HjbOutcome> {
    let ms = cfg.model.build();
    let value = solve_model(cfg, &ms)?;
    Ok(HjbOutcome {
        residual_upwind: hjb_residual(&value, &ms, Stencil::Upwind)?,
        residual_centered: hjb_residual(&value, &ms, Stencil::Centered)?,
        value,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationRow {
    pub family: &'static str,
    pub level: f64,
    pub estimate: CostEstimate,
}

/// Cost of the configured policy under every configured family, level and seed.
pub fn run_evaluate(cfg: &ExperimentConfig) -> Result<Vec<EvaluationRow>> {
    let ms = cfg.model.build();
    let prepared = prepare_policy(cfg, &ms)?;
    cells(cfg)
        .into_iter()
        .map(|(family, level, seed)| {
            let spec = cfg.noise_spec(family.at(level), seed);
            let estimate = evaluate(cfg, &ms, &spec, Some(&prepared.policy), Draw::Lift)?;
            Ok(EvaluationRow {
                family: spec.family.name(),
                level,
                estimate,
            })
        })
        .collect()
}

pub fn evaluation_csv(rows: &[EvaluationRow]) -> String {
    let mut s = String::from("family,level,seed,mean,std_error,n_paths,truncation_bound,excluded\n");
    for r in rows {
        let e = &r.estimate;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.family, r.level, e.seed, e.mean, e.std_error, e.n_paths, e.truncation_bound, e.excluded
        );
    }
    s
}
