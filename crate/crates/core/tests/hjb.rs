use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roughctl::hjb::{hjb_residual, policy_value, solve_discounted, solve_finite_horizon, ModelSpec, Stencil};

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.map(f64::abs).fold(0.0, f64::max)
}

#[test]
fn corrected_drift_formula() {
    let flat = ModelSpec::symmetric();
    assert_eq!(flat.corrected_drift(0.7, 0.3), 0.3);
    let ms = ModelSpec {
        diffusion: Arc::new(|x: f64| x.sin() + 2.0),
        diffusion_slope: None,
        ..ModelSpec::constant_cost(1.0, 0.0, 1.0)
    };
    assert!((ms.corrected_drift(0.0, 0.0) - 1.0).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let x: f64 = rng.random_range(-5.0..5.0);
        let exact = 0.5 * x.cos() * (x.sin() + 2.0);
        assert!((ms.corrected_drift(x, 0.0) - exact).abs() < 1e-5);
    }
}

#[test]
fn constant_cost_gives_constant_value() {
    let ms = ModelSpec::constant_cost(1.0, 0.0, 0.5);
    let v = solve_discounted(&ms, 201, 11).unwrap();
    assert!(max_abs(v.row(0).iter().map(|x| x - 2.0)) < 1e-9);
    assert!(hjb_residual(&v, &ms, Stencil::Upwind).unwrap() < 1e-9);
    assert!(hjb_residual(&v, &ms, Stencil::Centered).unwrap() < 1e-9);
}

#[test]
fn symmetric_model_has_even_value_and_odd_selector() {
    let ms = ModelSpec::symmetric();
    let v = solve_discounted(&ms, 601, 41).unwrap();
    let (row, sel) = (v.row(0), v.selector_row(0));
    let step = 2.0 / 40.0;
    for i in 0..601 {
        assert!((row[i] - row[600 - i]).abs() <= 1e-6);
        assert!((sel[i] + sel[600 - i]).abs() <= step + 1e-12);
    }
    assert!(sel[100] > 0.0 && sel[500] < 0.0);
}

#[test]
fn value_is_bounded_by_cost_over_discount() {
    for ms in [ModelSpec::symmetric(), ModelSpec::uncontrolled()] {
        let v = solve_discounted(&ms, 301, 21).unwrap();
        let bound = ms.cost_bound / ms.discount + 1e-6;
        assert!(v.values.iter().all(|&x| (0.0..=bound).contains(&x)));
    }
}

#[test]
fn value_increases_with_cost() {
    let base = ModelSpec::symmetric();
    let raised = ModelSpec {
        running_cost: Arc::new(|x: f64, u: f64| (x * x).min(4.0) + 0.1 * u * u + 0.1),
        cost_bound: 4.2,
        ..ModelSpec::symmetric()
    };
    let a = solve_discounted(&base, 301, 21).unwrap();
    let b = solve_discounted(&raised, 301, 21).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!(y >= &(x - 1e-9));
        // a constant shift of c by 0.1 shifts V by 0.1 / α
        assert!((y - x - 0.1).abs() < 1e-8);
    }
}

#[test]
fn selector_is_a_policy_iteration_fixed_point() {
    let ms = ModelSpec::symmetric();
    let v = solve_discounted(&ms, 601, 41).unwrap();
    let w = policy_value(&v, &ms, v.selector_row(0)).unwrap();
    assert!(max_abs(w.iter().zip(v.row(0)).map(|(a, b)| a - b)) < 1e-8);
    assert!(v.report.iterations < 100);
    assert!(policy_value(&v, &ms, &[0.0; 3]).is_err());
}

#[test]
fn residual_detects_a_perturbed_node() {
    let ms = ModelSpec::symmetric();
    let mut v = solve_discounted(&ms, 301, 21).unwrap();
    let before = hjb_residual(&v, &ms, Stencil::Upwind).unwrap();
    v.values[150] += 1e-3;
    let after = hjb_residual(&v, &ms, Stencil::Upwind).unwrap();
    assert!(after - before >= ms.discount * 1e-3);
}

#[test]
fn centered_residual_halves_under_refinement() {
    let ms = ModelSpec::uncontrolled();
    let r: Vec<f64> = [151, 301, 601]
        .iter()
        .map(|&nx| {
            let v = solve_discounted(&ms, nx, 1).unwrap();
            hjb_residual(&v, &ms, Stencil::Centered).unwrap()
        })
        .collect();
    for w in r.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.5..=3.0).contains(&ratio), "{r:?}");
    }
}

#[test]
fn upwind_residual_small_on_smooth_model() {
    let ms = ModelSpec::uncontrolled();
    let v = solve_discounted(&ms, 601, 1).unwrap();
    assert!(hjb_residual(&v, &ms, Stencil::Upwind).unwrap() <= 1e-6);
}

#[test]
fn finite_horizon_constant_cases() {
    let terminal = ModelSpec::constant_cost(0.0, 3.0, 1.0);
    let v = solve_finite_horizon(&terminal, 1.0, 10, 101, 5).unwrap();
    assert!(max_abs(v.values.iter().map(|x| x - 3.0)) < 1e-12);

    let running = ModelSpec::constant_cost(1.0, 0.0, 1.0);
    let v = solve_finite_horizon(&running, 2.0, 20, 101, 5).unwrap();
    for j in 0..v.rows() {
        let expect = 2.0 - v.time(j);
        assert!(max_abs(v.row(j).iter().map(|x| x - expect)) < 1e-6, "row {j}");
    }
    assert!(hjb_residual(&v, &running, Stencil::Upwind).unwrap() < 1e-6);
}

#[test]
fn finite_horizon_symmetry() {
    let ms = ModelSpec::symmetric();
    let v = solve_finite_horizon(&ms, 1.0, 20, 301, 21).unwrap();
    let step = 2.0 / 20.0;
    for j in 0..v.rows() {
        let (row, sel) = (v.row(j), v.selector_row(j));
        for i in 0..301 {
            assert!((row[i] - row[300 - i]).abs() <= 1e-6);
            assert!((sel[i] + sel[300 - i]).abs() <= step + 1e-12);
        }
    }
    // ψ(T, ·) is the terminal cost
    let last = v.row(v.rows() - 1);
    assert!((last[175] - v.x(175).powi(2)).abs() < 1e-12);
}

#[test]
fn finite_horizon_value_grows_with_remaining_time() {
    let ms = ModelSpec::uncontrolled();
    let v = solve_finite_horizon(&ms, 1.0, 10, 201, 1).unwrap();
    for j in 0..v.rows() - 1 {
        assert!(v.row(j)[100] >= v.row(j + 1)[100]);
    }
}

#[test]
fn invalid_models_rejected() {
    let bad = ModelSpec {
        discount: 0.0,
        ..ModelSpec::symmetric()
    };
    assert!(solve_discounted(&bad, 101, 5).is_err());
    let negative = ModelSpec::constant_cost(-1.0, 0.0, 1.0);
    assert!(solve_discounted(&negative, 101, 5).is_err());
    assert!(solve_finite_horizon(&ModelSpec::symmetric(), 1.0, 1000, 100_001, 5).is_err());
}
