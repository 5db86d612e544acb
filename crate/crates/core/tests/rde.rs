use roughctl::noise::{brownian_lift, sample_brownian_path, Interpretation, NoiseFamily, NoiseSpec};
use roughctl::rde::{jacobian_mismatch, rough_integral, solve_rde, strong_error, ItoCorrected, SolverOptions, VectorField};
use roughctl::rough::{lift_piecewise_linear, ControlledPath, RoughPath};
use roughctl::stats::median;
use roughctl::{Error, TimeGrid};

/// `dY = b(Y, u) dt + σ(Y) dX` from plain functions, with an analytic Jacobian.
struct Field {
    m: usize,
    d: usize,
    drift: fn(&[f64], f64, &mut [f64]),
    sigma: fn(&[f64], &mut [f64]),
    jacobian: fn(&[f64], &mut [f64]),
}

impl VectorField for Field {
    fn state_dim(&self) -> usize {
        self.m
    }
    fn noise_dim(&self) -> usize {
        self.d
    }
    fn drift(&self, x: &[f64], u: f64, out: &mut [f64]) {
        (self.drift)(x, u, out)
    }
    fn sigma(&self, x: &[f64], out: &mut [f64]) {
        (self.sigma)(x, out)
    }
    fn sigma_jacobian(&self, x: &[f64], out: &mut [f64]) {
        (self.jacobian)(x, out)
    }
}

fn no_drift(_: &[f64], _: f64, out: &mut [f64]) {
    out.fill(0.0);
}

/// Two states driven by two noises with non-commuting columns:
/// `σ(y) = [[1, 0], [0, y₁]]` (a Heisenberg-type system).
fn heisenberg() -> Field {
    Field {
        m: 2,
        d: 2,
        drift: |y, u, out| {
            out[0] = -0.5 * y[0] + u;
            out[1] = 0.0;
        },
        sigma: |y, out| out.copy_from_slice(&[1.0, 0.0, 0.0, y[0]]),
        jacobian: |_, out| {
            out.fill(0.0);
            // ∂σ_{11}/∂y_0 at ((1·2 + 1)·2 + 0)
            out[6] = 1.0;
        },
    }
}

fn unit(cells: usize) -> TimeGrid {
    TimeGrid::uniform(0.0, 1.0, cells).unwrap()
}

fn strat(cells: usize, dim: usize, seed: u64) -> RoughPath {
    let w = sample_brownian_path(&unit(cells), dim, seed, 0).unwrap();
    brownian_lift(&w, Interpretation::Stratonovich, 8, 0.4).unwrap()
}

#[test]
fn analytic_jacobians_agree_with_differences() {
    let f = heisenberg();
    assert!(jacobian_mismatch(&f, &[0.3, -1.2]) < 1e-8);
    let wrong = Field {
        jacobian: |_, out| out.fill(0.0),
        ..heisenberg()
    };
    assert!(jacobian_mismatch(&wrong, &[0.3, -1.2]) > 0.1);
}

#[test]
fn degenerate_ode_moves_along_first_axis() {
    let f = Field {
        m: 3,
        d: 2,
        drift: |_, _, out| out.copy_from_slice(&[1.0, 0.0, 0.0]),
        sigma: |_, out| out.fill(0.0),
        jacobian: |_, out| out.fill(0.0),
    };
    let drv = strat(64, 2, 1);
    let sol = solve_rde(&f, None, &drv, &[0.5, 1.0, -1.0], &SolverOptions::default()).unwrap();
    for (k, t) in drv.grid().points().iter().enumerate() {
        assert!((sol.value(k)[0] - 0.5 - t).abs() < 1e-14);
        assert_eq!(&sol.value(k)[1..], &[1.0, -1.0]);
    }
}

#[test]
fn heisenberg_area_is_captured() {
    // with y₀ = 0 and no drift, y₂(1) = ∫ X¹ dX², the second-level entry (1, 2)
    let f = Field {
        drift: no_drift,
        ..heisenberg()
    };
    let drv = strat(128, 2, 7);
    let sol = solve_rde(&f, None, &drv, &[0.0, 0.0], &SolverOptions::default()).unwrap();
    let (_, xx) = drv.chen_extend(0, 128).unwrap();
    assert!((sol.terminal()[1] - xx[1]).abs() < 1e-12);
    assert!((sol.terminal()[0] - drv.values()[128 * 2]).abs() < 1e-12);
}

#[test]
fn ito_correction_matches_stratonovich_in_two_dimensions() {
    // σ(y) = y₀ I, whose correction ½ y₀ e₀ is nonzero
    let f = Field {
        sigma: |y, out| out.copy_from_slice(&[y[0], 0.0, 0.0, y[0]]),
        jacobian: |_, out| {
            out.fill(0.0);
            out[0] = 1.0;
            out[6] = 1.0;
        },
        ..heisenberg()
    };
    assert!(jacobian_mismatch(&f, &[0.4, 0.9]) < 1e-8);
    let w = sample_brownian_path(&unit(512), 2, 3, 0).unwrap();
    let s = brownian_lift(&w, Interpretation::Stratonovich, 8, 0.4).unwrap();
    let i = s.stratonovich_to_ito().unwrap();
    let opts = SolverOptions::default();
    let a = solve_rde(&f, None, &s, &[0.2, 0.1], &opts).unwrap();
    let b = solve_rde(&ItoCorrected(&f), None, &i, &[0.2, 0.1], &opts).unwrap();
    assert!(strong_error(&a, &b).unwrap() < 1e-12);
    // ignoring the correction is visible
    let c = solve_rde(&f, None, &i, &[0.2, 0.1], &opts).unwrap();
    assert!(strong_error(&a, &c).unwrap() > 1e-3);
}

#[test]
fn refinement_converges_for_non_commuting_fields() {
    let f = heisenberg();
    let opts = SolverOptions::default();
    let policy = |_t: f64, x: &[f64]| (-x[1]).clamp(-1.0, 1.0);
    let mut errs = vec![Vec::new(); 4];
    for seed in 0..8 {
        let fine = strat(4096, 2, seed);
        let reference = solve_rde(&f, Some(&policy), &fine, &[0.0, 1.0], &opts).unwrap();
        for (e, factor) in errs.iter_mut().zip([64, 32, 16, 8]) {
            let coarse = fine.coarsen(factor).unwrap();
            let sol = solve_rde(&f, Some(&policy), &coarse, &[0.0, 1.0], &opts).unwrap();
            e.push(strong_error(&reference, &sol).unwrap());
        }
    }
    let med: Vec<f64> = errs.iter().map(|e| median(e)).collect();
    assert!(med.windows(2).all(|w| w[1] < w[0]), "{med:?}");
    assert!(med[3] < 0.05, "{med:?}");
}

#[test]
fn wong_zakai_solutions_approach_stratonovich() {
    let f = Field {
        m: 1,
        d: 1,
        drift: |y, _, out| out[0] = -y[0],
        sigma: |y, out| out[0] = y[0].sin() + 2.0,
        jacobian: |y, out| out[0] = y[0].cos(),
    };
    let grid = unit(1024);
    let opts = SolverOptions::default();
    let mut med = Vec::new();
    for n in [16, 64, 256] {
        let errs: Vec<f64> = (0..9)
            .map(|seed| {
                let spec = NoiseSpec::new(NoiseFamily::WongZakai { n }, 1, seed);
                let a = solve_rde(&f, None, &spec.lift(&grid, 0).unwrap(), &[0.5], &opts).unwrap();
                let b = solve_rde(&f, None, &spec.reference_lift(&grid, 0).unwrap(), &[0.5], &opts).unwrap();
                strong_error(&b, &a).unwrap()
            })
            .collect();
        med.push(median(&errs));
    }
    assert!(med.windows(2).all(|w| w[1] < w[0]), "{med:?}");
}

#[test]
fn solution_depends_continuously_on_the_driver() {
    let f = heisenberg();
    let drv = strat(256, 2, 11);
    let opts = SolverOptions::default();
    let base = solve_rde(&f, None, &drv, &[0.1, 0.1], &opts).unwrap();
    let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|eps| {
            let moved = drv.dilate(1.0 + eps).unwrap();
            strong_error(&base, &solve_rde(&f, None, &moved, &[0.1, 0.1], &opts).unwrap()).unwrap()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < 0.2 * w[0]), "{gaps:?}");
}

#[test]
fn rough_integral_of_the_driver_is_its_second_level() {
    let drv = strat(256, 2, 5);
    let n = drv.cells();
    let mut deriv = Vec::new();
    for _ in 0..=n {
        deriv.extend_from_slice(&[1.0, 0.0, 0.0, 1.0]);
    }
    let cp = ControlledPath::new(drv.grid().clone(), 2, 2, drv.values().to_vec(), deriv).unwrap();
    let integral = rough_integral(&cp, &drv).unwrap();
    let (_, xx) = drv.chen_extend(0, n).unwrap();
    for (a, b) in integral.iter().zip(&xx) {
        assert!((a - b).abs() < 1e-12);
    }
    let zero = ControlledPath::new(drv.grid().clone(), 1, 2, vec![0.0; n + 1], vec![0.0; 2 * (n + 1)]).unwrap();
    assert_eq!(rough_integral(&zero, &drv).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn rough_integral_chain_rule() {
    let errs: Vec<f64> = (0..20)
        .map(|seed| {
            let drv = strat(4096, 1, seed);
            let x = drv.values().to_vec();
            let cp = ControlledPath::new(drv.grid().clone(), 1, 1, x.clone(), vec![1.0; 4097]).unwrap();
            (rough_integral(&cp, &drv).unwrap()[0] - 0.5 * x[4096] * x[4096]).abs()
        })
        .collect();
    assert!(median(&errs) <= 1e-3);
}

#[test]
fn rough_integral_refinement_is_stable() {
    // ∫ sin(X) dX for a smooth driver: coarse and fine compensated sums agree to O(h²)
    let fine = unit(2048);
    let samples: Vec<f64> = fine.points().iter().map(|t| (3.0 * t).sin()).collect();
    let drv = lift_piecewise_linear(&samples, 1, &fine, 0.4).unwrap();
    let integral = |rp: &RoughPath| {
        let x = rp.values();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let yp: Vec<f64> = x.iter().map(|v| v.cos()).collect();
        let cp = ControlledPath::new(rp.grid().clone(), 1, 1, y, yp).unwrap();
        rough_integral(&cp, rp).unwrap()[0]
    };
    let exact = 1.0 - (3.0f64).sin().cos();
    let coarse = (integral(&drv.coarsen(16).unwrap()) - exact).abs();
    let finer = (integral(&drv.coarsen(4).unwrap()) - exact).abs();
    assert!(finer < coarse / 8.0, "{coarse} {finer}");
}

#[test]
fn escaping_state_reports_its_step() {
    let f = Field {
        m: 1,
        d: 1,
        drift: |y, _, out| out[0] = y[0] * y[0],
        sigma: |_, out| out[0] = 0.0,
        jacobian: |_, out| out[0] = 0.0,
    };
    let grid = TimeGrid::uniform(0.0, 5.0, 500).unwrap();
    let drv = RoughPath::zero(grid, 1, 0.4).unwrap();
    match solve_rde(&f, None, &drv, &[1.0], &SolverOptions::default()) {
        Err(Error::Divergence { step, .. }) => assert!(step > 90 && step < 500, "{step}"),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn shape_errors() {
    let f = heisenberg();
    let drv = strat(8, 2, 0);
    assert!(solve_rde(&f, None, &drv, &[0.0], &SolverOptions::default()).is_err());
    assert!(solve_rde(&f, None, &strat(8, 1, 0), &[0.0, 0.0], &SolverOptions::default()).is_err());
    assert!(solve_rde(&f, None, &drv, &[f64::NAN, 0.0], &SolverOptions::default()).is_err());
}

#[test]
fn strong_error_uses_shared_points() {
    let grid = unit(4);
    let a = ControlledPath::new(grid.clone(), 1, 1, vec![0.0; 5], vec![0.0; 5]).unwrap();
    let mut vals = vec![0.0; 5];
    vals[2] = 1e-3;
    let b = ControlledPath::new(grid, 1, 1, vals, vec![0.0; 5]).unwrap();
    assert_eq!(strong_error(&a, &a).unwrap(), 0.0);
    assert_eq!(strong_error(&a, &b).unwrap(), 1e-3);
    let coarse = ControlledPath::new(unit(2), 1, 1, vec![0.0; 3], vec![0.0; 3]).unwrap();
    assert_eq!(strong_error(&b, &coarse).unwrap(), 1e-3);
}
