//! Self-test suites runnable from the command line.

use serde::Serialize;

use crate::cost::{discounted_cost, truncation_bound, CostSetup};
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::hjb::{solve_discounted, ModelSpec};
use crate::noise::{
    brownian_lift, fbm_covariance, sample_brownian_path, sample_fbm_path, FbmSampler, Interpretation, KarhunenLoeve,
    NoiseFamily, NoiseSpec,
};
use crate::policy::{read_policy, write_policy, LipschitzPolicy};
use crate::rde::{solve_rde, SolverOptions, VectorField};
use crate::rough::{check_chen, check_geometric, lift_piecewise_linear, read_columnar, write_columnar};
use crate::stats::{mean_and_se, median};

use super::config::{ExperimentConfig, Injection, Suite};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateReport {
    pub passed: bool,
    pub suites: Vec<SuiteOutcome>,
}

impl ValidateReport {
    pub fn failed_checks(&self) -> Vec<String> {
        self.suites
            .iter()
            .flat_map(|s| s.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}/{}", s.suite, c.name)))
            .collect()
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

pub fn run_validate(cfg: &ExperimentConfig) -> Result<ValidateReport> {
    let seed = cfg.seeds[0];
    let mut suites = Vec::new();
    for suite in &cfg.validate.suites {
        let checks = match suite {
            Suite::Rough => rough_suite(seed, cfg.validate.inject)?,
            Suite::Noise => noise_suite(seed)?,
            Suite::Rde => rde_suite(seed)?,
            Suite::Policy => policy_suite(seed)?,
            Suite::Hjb => hjb_suite()?,
            Suite::Cost => cost_suite(seed)?,
        };
        suites.push(SuiteOutcome {
            suite: suite.name(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        });
    }
    Ok(ValidateReport {
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

fn rough_suite(seed: u64, inject: Option<Injection>) -> Result<Vec<CheckOutcome>> {
    let grid = TimeGrid::uniform(0.0, 1.0, 256)?;
    let (mut chen, mut geo) = (0.0f64, 0.0f64);
    let (mut chen_ok, mut geo_ok) = (true, true);
    for path in 0..5 {
        let w = sample_brownian_path(&grid, 2, seed, path)?;
        let mut rp = lift_piecewise_linear(w.values(), 2, &grid, 0.4)?;
        if inject == Some(Injection::ChenCorruption) && path == 0 {
            rp.corrupt_cell_second_level(10, 0, 1, 1e-3);
        }
        let c = check_chen(&rp, 1e-10);
        let g = check_geometric(&rp, 1e-10);
        chen = chen.max(c.residual / c.scale);
        geo = geo.max(g.residual / g.scale);
        chen_ok &= c.passed;
        geo_ok &= g.passed;
    }
    let w = sample_brownian_path(&grid, 1, seed, 0)?;
    let ito = brownian_lift(&w, Interpretation::Ito, 1, 0.4)?;
    let ito_err = (0..grid.cells())
        .map(|k| {
            let x = ito.cell_increment(k)[0];
            (ito.cell_second_level(k)[0] - 0.5 * (x * x - grid.step(k))).abs()
        })
        .fold(0.0, f64::max);
    let back = read_columnar(&write_columnar(&ito))?;
    Ok(vec![
        check("chen", chen_ok, format!("relative residual {chen:e}")),
        check("geometric", geo_ok, format!("relative residual {geo:e}")),
        check("ito-identity", ito_err <= 1e-12, format!("max cell error {ito_err:e}")),
        check(
            "columnar-round-trip",
            back.increments() == ito.increments() && back.second_level() == ito.second_level(),
            String::new(),
        ),
    ])
}

fn noise_suite(seed: u64) -> Result<Vec<CheckOutcome>> {
    let grid = TimeGrid::uniform(0.0, 1.0, 4)?;
    let draws = 10_000;
    let squares: Vec<f64> = (0..draws)
        .map(|p| sample_brownian_path(&grid, 1, seed, p).map(|w| w.value(4)[0].powi(2)))
        .collect::<Result<_>>()?;
    let (ms, se) = mean_and_se(&squares);
    let fine = TimeGrid::uniform(0.0, 1.0, 16)?;
    let sampler = FbmSampler::new(0.4, &fine)?;
    let prods: Vec<f64> = (0..4_000)
        .map(|p| sample_fbm_path(&sampler, &fine, 1, seed, p).map(|s| s.values()[4] * s.values()[12]))
        .collect::<Result<_>>()?;
    let (cov, cov_se) = mean_and_se(&prods);
    let exact = fbm_covariance(0.4, 0.25, 0.75);
    let kl = KarhunenLoeve::from_coefficients(1, vec![1.0])?;
    let mut v = [0.0];
    kl.value(1.0, &mut v);
    let kl_exact = 2.0 * std::f64::consts::SQRT_2 / std::f64::consts::PI;
    let spec = NoiseSpec::new(NoiseFamily::BrownianStrat, 2, seed);
    let wz = spec.with_family(NoiseFamily::WongZakai { n: 8 });
    let g = TimeGrid::uniform(0.0, 1.0, 64)?;
    Ok(vec![
        check(
            "brownian-variance",
            (ms - 1.0).abs() <= 4.0 * se,
            format!("E[W(1)²] = {ms:.4} ± {se:.4}"),
        ),
        check(
            "fbm-covariance",
            (cov - exact).abs() <= 4.0 * cov_se,
            format!("{cov:.4} ± {cov_se:.4} against {exact:.4}"),
        ),
        check("kl-single-term", (v[0] - kl_exact).abs() < 1e-14, format!("{}", v[0])),
        check(
            "coupling",
            spec.brownian(&g, 3)?.values() == wz.brownian(&g, 3)?.values(),
            String::new(),
        ),
    ])
}

struct Geometric;

impl VectorField for Geometric {
    fn state_dim(&self) -> usize {
        1
    }
    fn noise_dim(&self) -> usize {
        1
    }
    fn drift(&self, _x: &[f64], _u: f64, out: &mut [f64]) {
        out[0] = 0.0;
    }
    fn sigma(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[0];
    }
    fn sigma_jacobian(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
    }
}

fn rde_suite(seed: u64) -> Result<Vec<CheckOutcome>> {
    let grid = TimeGrid::uniform(0.0, 1.0, 1024)?;
    let opts = SolverOptions::default();
    let errors: Vec<f64> = (0..5)
        .map(|p| {
            let w = sample_brownian_path(&grid, 1, seed, p)?;
            let drv = brownian_lift(&w, Interpretation::Stratonovich, 1, 0.4)?;
            let sol = solve_rde(&Geometric, None, &drv, &[1.0], &opts)?;
            Ok((0..=grid.cells())
                .map(|k| (sol.value(k)[0] - w.value(k)[0].exp()).abs())
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let err = median(&errors);
    let ms = ModelSpec::constant_cost(1.0, 0.0, 1.0);
    let zero = crate::rough::RoughPath::zero(grid.clone(), 1, 0.4)?;
    let drift = |_t: f64, _x: &[f64]| 0.25;
    let sol = solve_rde(&ms, Some(&drift), &zero, &[0.0], &opts)?;
    let drift_err = (sol.terminal()[0] - 0.25).abs();
    Ok(vec![
        check("geometric-brownian", err <= 0.05, format!("median sup error {err:e}")),
        check("pure-drift", drift_err < 1e-12, format!("terminal error {drift_err:e}")),
    ])
}

fn policy_suite(seed: u64) -> Result<Vec<CheckOutcome>> {
    let values: Vec<f64> = (0..41).map(|i| if i < 20 { 1.0 } else { -1.0 }).collect();
    let raw = LipschitzPolicy::from_selector(2.0, values, (-1.0, 1.0))?;
    let smooth = raw.mollify(0.2)?;
    let check_result = smooth.check_lipschitz(10_000, seed);
    let back = read_policy(&write_policy(&smooth))?;
    Ok(vec![
        check(
            "mollified-certificate",
            smooth.certified_lipschitz() <= raw.raw_state_slope() && check_result.passed,
            format!(
                "certified {} (raw {}), worst sampled ratio {}",
                smooth.certified_lipschitz(),
                raw.raw_state_slope(),
                check_result.worst_ratio
            ),
        ),
        check("file-round-trip", back == smooth, String::new()),
    ])
}

fn hjb_suite() -> Result<Vec<CheckOutcome>> {
    let constant = ModelSpec::constant_cost(1.0, 0.0, 0.5);
    let v = solve_discounted(&constant, 121, 5)?;
    let err = v.values.iter().map(|x| (x - 2.0).abs()).fold(0.0, f64::max);
    let sym = ModelSpec::symmetric();
    let v = solve_discounted(&sym, 201, 21)?;
    let n = v.nx;
    let even = (0..n).map(|i| (v.values[i] - v.values[n - 1 - i]).abs()).fold(0.0, f64::max);
    let bound = v.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        check("constant-cost", err <= 1e-9, format!("max error {err:e}")),
        check("symmetry", even <= 1e-6, format!("max |V(x) - V(-x)| = {even:e}")),
        check(
            "cost-bound",
            bound <= sym.cost_bound / sym.discount + 1e-6,
            format!("max V = {bound}"),
        ),
    ])
}

fn cost_suite(seed: u64) -> Result<Vec<CheckOutcome>> {
    let ms = ModelSpec::constant_cost(1.0, 0.0, 0.5);
    let noise = NoiseSpec::new(NoiseFamily::BrownianStrat, 1, seed);
    let est = discounted_cost(&ms, &noise, None, 40.0, &CostSetup::new(0.0, 32, 64))?;
    let exact = -(-20f64).exp_m1() / 0.5;
    let tb = truncation_bound(1.0, 1.0, 10.0);
    Ok(vec![
        check(
            "constant-cost",
            (est.mean - exact).abs() < 1e-9 && est.std_error < 1e-12,
            format!("{} ± {}", est.mean, est.std_error),
        ),
        check("truncation-bound", (tb - (-10f64).exp()).abs() < 1e-18, format!("{tb:e}")),
    ])
}
