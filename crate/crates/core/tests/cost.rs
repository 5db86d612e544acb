use std::sync::Arc;

use roughctl::cost::{
    cost_gap, discounted_cost, finite_horizon_cost, truncation_bound, truncation_horizon, CostSetup, Draw,
};
use roughctl::hjb::{solve_finite_horizon, ModelSpec};
use roughctl::noise::{NoiseFamily, NoiseSpec};
use roughctl::policy::LipschitzPolicy;
use roughctl::stats::median;
use roughctl::Error;

fn strat(seed: u64) -> NoiseSpec {
    NoiseSpec::new(NoiseFamily::BrownianStrat, 1, seed)
}

fn linear_policy() -> LipschitzPolicy {
    let v: Vec<f64> = (0..121).map(|i| -(i as f64 / 10.0 - 6.0)).collect();
    LipschitzPolicy::from_selector(6.0, v, (-1.0, 1.0)).unwrap()
}

fn sample_variance(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

#[test]
fn truncation_bound_closed_form() {
    assert!((truncation_bound(1.0, 1.0, 10.0) - (-10f64).exp()).abs() < 1e-18);
    let t = truncation_horizon(4.1, 1.0, 1e-6);
    assert!((truncation_bound(4.1, 1.0, t) - 1e-6).abs() < 1e-15);
}

#[test]
fn constant_costs_have_no_variance() {
    let terminal = ModelSpec::constant_cost(0.0, 3.0, 1.0);
    let est = finite_horizon_cost(&terminal, &strat(1), None, 1.0, &CostSetup::new(0.3, 50, 32)).unwrap();
    assert_eq!((est.mean, est.std_error), (3.0, 0.0));

    let running = ModelSpec::constant_cost(1.0, 0.0, 1.0);
    let est = finite_horizon_cost(&running, &strat(1), None, 2.0, &CostSetup::new(0.3, 50, 32)).unwrap();
    assert!((est.mean - 2.0).abs() < 1e-12 && est.std_error < 1e-12);

    let disc = ModelSpec::constant_cost(1.0, 0.0, 0.5);
    let est = discounted_cost(&disc, &strat(1), None, 40.0, &CostSetup::new(0.0, 20, 16)).unwrap();
    assert!((est.mean - 2.0).abs() < 1e-8);
    assert!((est.truncation_bound - 4.1e-9).abs() < 1e-10);
}

#[test]
fn ornstein_uhlenbeck_mean_oracle() {
    // dX = -X dt + dW, c(x) = x clipped to ±20: J = ∫ e^{-t} x0 e^{-t} dt = x0 / 2
    let ms = ModelSpec {
        name: "ou".into(),
        drift: Arc::new(|x: f64, _| -x),
        running_cost: Arc::new(|x: f64, _| x.clamp(-20.0, 20.0)),
        cost_bound: 20.0,
        actions: (0.0, 0.0),
        ..ModelSpec::constant_cost(0.0, 0.0, 1.0)
    };
    let horizon = truncation_horizon(20.0, 1.0, 1e-6).ceil();
    let est = discounted_cost(&ms, &strat(21), None, horizon, &CostSetup::new(1.0, 10_000, 256)).unwrap();
    assert!((est.mean - 0.5).abs() < 3.0 * est.std_error, "{} ± {}", est.mean, est.std_error);
}

#[test]
fn mirrored_starts_agree_on_symmetric_model() {
    let ms = ModelSpec::symmetric();
    let v = solve_finite_horizon(&ms, 1.0, 20, 301, 21).unwrap();
    let policy = v.to_policy(ms.actions).unwrap().mollify(0.2).unwrap();
    let a = finite_horizon_cost(&ms, &strat(4), Some(&policy), 1.0, &CostSetup::new(0.7, 500, 128)).unwrap();
    let mut setup = CostSetup::new(-0.7, 500, 128);
    setup.mirror = true;
    let b = finite_horizon_cost(&ms, &strat(4), Some(&policy), 1.0, &setup).unwrap();
    let g = cost_gap(&a, &b);
    assert!(g.gap <= 3.0 * g.combined_se, "{g:?}");
}

#[test]
fn identical_runs_have_zero_gap() {
    let ms = ModelSpec::symmetric();
    let p = linear_policy();
    let run = || finite_horizon_cost(&ms, &strat(8), Some(&p), 1.0, &CostSetup::new(0.5, 300, 64)).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let g = cost_gap(&a, &b);
    assert_eq!(g.gap, 0.0);
    assert!(!g.significant);
}

#[test]
fn gap_is_calibrated_across_seeds() {
    let ms = ModelSpec::symmetric();
    let p = linear_policy();
    let setup = CostSetup::new(0.5, 200, 32);
    let within = (0..100u64)
        .filter(|&r| {
            let a = finite_horizon_cost(&ms, &strat(1000 + r), Some(&p), 1.0, &setup).unwrap();
            let b = finite_horizon_cost(&ms, &strat(5000 + r), Some(&p), 1.0, &setup).unwrap();
            !cost_gap(&a, &b).significant
        })
        .count();
    assert!(within >= 99, "{within}");
}

#[test]
fn common_random_numbers_reduce_gap_variance() {
    let ms = ModelSpec::symmetric();
    let p = linear_policy();
    let setup = CostSetup::new(0.5, 200, 64);
    let mut ideal = setup;
    ideal.draw = Draw::Reference;
    let wz = |seed| strat(seed).with_family(NoiseFamily::WongZakai { n: 8 });
    let (mut shared, mut independent) = (Vec::new(), Vec::new());
    for r in 0..20u64 {
        let approx = finite_horizon_cost(&ms, &wz(r), Some(&p), 1.0, &setup).unwrap();
        let same = finite_horizon_cost(&ms, &wz(r), Some(&p), 1.0, &ideal).unwrap();
        let other = finite_horizon_cost(&ms, &wz(r + 100), Some(&p), 1.0, &ideal).unwrap();
        shared.push(approx.mean - same.mean);
        independent.push(approx.mean - other.mean);
    }
    assert!(sample_variance(&shared) < sample_variance(&independent));
}

#[test]
fn standard_error_shrinks_like_root_n() {
    let ms = ModelSpec::symmetric();
    let p = linear_policy();
    let a = finite_horizon_cost(&ms, &strat(3), Some(&p), 1.0, &CostSetup::new(0.5, 4000, 32)).unwrap();
    let b = finite_horizon_cost(&ms, &strat(3), Some(&p), 1.0, &CostSetup::new(0.5, 8000, 32)).unwrap();
    let ratio = b.std_error / a.std_error;
    assert!((ratio - 0.5f64.sqrt()).abs() <= 0.15 * 0.5f64.sqrt(), "{ratio}");
}

#[test]
fn per_path_costs_converge_under_wong_zakai() {
    let ms = ModelSpec::symmetric();
    let p = linear_policy();
    let mut ideal = CostSetup::new(0.5, 200, 512);
    ideal.draw = Draw::Reference;
    let base = strat(17);
    let reference = discounted_cost(&ms, &base, Some(&p), 2.0, &ideal).unwrap();
    let medians: Vec<f64> = [8, 32, 128, 512]
        .iter()
        .map(|&n| {
            let spec = base.with_family(NoiseFamily::WongZakai { n });
            let est = discounted_cost(&ms, &spec, Some(&p), 2.0, &CostSetup::new(0.5, 200, 512)).unwrap();
            let diffs: Vec<f64> = est.samples.iter().zip(&reference.samples).map(|(a, b)| (a - b).abs()).collect();
            median(&diffs)
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] < w[0]), "{medians:?}");
}

#[test]
fn fingerprints_identify_inputs() {
    let ms = ModelSpec::symmetric();
    let p = linear_policy();
    let setup = CostSetup::new(0.5, 10, 16);
    let a = finite_horizon_cost(&ms, &strat(1), Some(&p), 1.0, &setup).unwrap();
    let b = finite_horizon_cost(&ms, &strat(2), None, 1.0, &setup).unwrap();
    assert_eq!(a.fingerprints.model, b.fingerprints.model);
    assert_ne!(a.fingerprints.noise, b.fingerprints.noise);
    assert_eq!(b.fingerprints.policy, "none");
    assert_eq!(a.fingerprints.policy.len(), 16);
}

#[test]
fn divergent_paths_abort() {
    let ms = ModelSpec {
        drift: Arc::new(|x: f64, _| x * x),
        ..ModelSpec::constant_cost(1.0, 0.0, 1.0)
    };
    match finite_horizon_cost(&ms, &strat(1), None, 2.0, &CostSetup::new(2.0, 20, 64)) {
        Err(Error::TooManyDivergences { excluded, total }) => assert_eq!((excluded, total), (20, 20)),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn invalid_setups_rejected() {
    let ms = ModelSpec::symmetric();
    assert!(finite_horizon_cost(&ms, &strat(1), None, 1.0, &CostSetup::new(0.0, 0, 16)).is_err());
    assert!(finite_horizon_cost(&ms, &strat(1), None, -1.0, &CostSetup::new(0.0, 4, 16)).is_err());
    let two_d = NoiseSpec::new(NoiseFamily::BrownianStrat, 2, 1);
    assert!(finite_horizon_cost(&ms, &two_d, None, 1.0, &CostSetup::new(0.0, 4, 16)).is_err());
}
