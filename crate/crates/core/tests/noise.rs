use roughctl::noise::{
    brownian_lift, fbm_lift, fgn_autocovariance, interpolate_linear, karhunen_loeve_lift, mollified_lift,
    sample_brownian_path, sample_fbm_path, wong_zakai_lift, FbmSampler, Interpretation, KarhunenLoeve, KlScaling,
    MollifiedPath, NoiseFamily, NoiseSpec,
};
use roughctl::rough::{check_chen, check_geometric, rough_distance, sup_distance, PairSet};
use roughctl::stats::mean_and_se;
use roughctl::TimeGrid;

fn unit(cells: usize) -> TimeGrid {
    TimeGrid::uniform(0.0, 1.0, cells).unwrap()
}

#[test]
fn brownian_marginals() {
    let grid = unit(16);
    let (mut sq, mut cross, mut mid) = (Vec::new(), Vec::new(), Vec::new());
    for p in 0..4000 {
        let w = sample_brownian_path(&grid, 2, 1, p).unwrap();
        let end = w.value(16);
        sq.push(end[0] * end[0]);
        cross.push(end[0] * end[1]);
        mid.push(w.value(8)[0] * end[0]);
    }
    let (v, se) = mean_and_se(&sq);
    assert!((v - 1.0).abs() < 4.0 * se, "{v} ± {se}");
    let (c, se) = mean_and_se(&cross);
    assert!(c.abs() < 4.0 * se, "{c} ± {se}");
    let (m, se) = mean_and_se(&mid);
    assert!((m - 0.5).abs() < 4.0 * se, "{m} ± {se}");
}

#[test]
fn draws_are_keyed_by_seed_and_path() {
    let grid = unit(32);
    let a = sample_brownian_path(&grid, 2, 5, 3).unwrap();
    let b = sample_brownian_path(&grid, 2, 5, 3).unwrap();
    assert_eq!(a.values(), b.values());
    assert_ne!(a.values(), sample_brownian_path(&grid, 2, 5, 4).unwrap().values());
    assert_ne!(a.values(), sample_brownian_path(&grid, 2, 6, 3).unwrap().values());
}

#[test]
fn bridge_refinement_keeps_coarse_points() {
    let grid = unit(8);
    let w = sample_brownian_path(&grid, 3, 2, 0).unwrap();
    let fine = w.bridge_refine(16).unwrap();
    assert_eq!(fine.grid().cells(), 128);
    for k in 0..=8 {
        assert_eq!(fine.value(16 * k), w.value(k));
    }
    assert_eq!(fine.subsample(16).unwrap().values(), w.values());
}

#[test]
fn levy_area_variance_matches_refined_bridge_law() {
    // area over a cell of length h refined by m has variance h²/4 · (1 - 1/m)
    let (cells, m) = (4096, 64);
    let grid = unit(cells);
    let h = 1.0 / cells as f64;
    let mut areas = Vec::new();
    for p in 0..4 {
        let w = sample_brownian_path(&grid, 2, 12, p).unwrap();
        let rp = brownian_lift(&w, Interpretation::Stratonovich, m, 0.4).unwrap();
        for k in 0..cells {
            let xx = rp.cell_second_level(k);
            let a = 0.5 * (xx[1] - xx[2]) / h;
            areas.push(a * a);
        }
    }
    let (v, se) = mean_and_se(&areas);
    let expect = 0.25 * (1.0 - 1.0 / m as f64);
    assert!((v - expect).abs() < 4.0 * se, "{v} ± {se} vs {expect}");
}

#[test]
fn brownian_lifts_are_valid_rough_paths() {
    let grid = unit(256);
    let w = sample_brownian_path(&grid, 2, 4, 0).unwrap();
    let strat = brownian_lift(&w, Interpretation::Stratonovich, 16, 0.4).unwrap();
    assert!(check_chen(&strat, 1e-10).passed);
    assert!(check_geometric(&strat, 1e-10).passed);
    let ito = brownian_lift(&w, Interpretation::Ito, 16, 0.4).unwrap();
    assert!(check_chen(&ito, 1e-10).passed);
    assert_eq!(strat.increments(), ito.increments());
    assert!(brownian_lift(&w, Interpretation::Ito, 0, 0.4).is_err());
}

#[test]
fn fbm_at_one_half_has_white_increments() {
    assert_eq!(fgn_autocovariance(0.5, 0), 1.0);
    for k in 1..10 {
        assert!(fgn_autocovariance(0.5, k).abs() < 1e-15);
    }
    assert!(fgn_autocovariance(0.7, 1) > 0.0);
    assert!(fgn_autocovariance(0.4, 1) < 0.0);
}

#[test]
fn fbm_coupling_is_continuous_in_hurst() {
    let grid = unit(256);
    let gap = |h: f64| {
        let a = sample_fbm_path(&FbmSampler::new(h, &grid).unwrap(), &grid, 1, 3, 0).unwrap();
        let b = sample_fbm_path(&FbmSampler::new(0.5, &grid).unwrap(), &grid, 1, 3, 0).unwrap();
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let (far, near) = (gap(0.4), gap(0.49));
    assert!(near < far, "{near} {far}");
    assert!(near < 0.1);
}

#[test]
fn fbm_lift_rejects_rough_regime() {
    let grid = unit(64);
    let s = sample_fbm_path(&FbmSampler::new(0.3, &grid).unwrap(), &grid, 1, 0, 0).unwrap();
    assert!(fbm_lift(&s, 0.4).is_err());
    let s = sample_fbm_path(&FbmSampler::new(0.45, &grid).unwrap(), &grid, 2, 0, 0).unwrap();
    let rp = fbm_lift(&s, 0.4).unwrap();
    assert!(check_geometric(&rp, 1e-10).passed);
}

#[test]
fn karhunen_loeve_fft_matches_direct_sum() {
    let kl = KarhunenLoeve::sample(64, 2, 8, 1).unwrap().rescaled(2.0).unwrap();
    let fast = kl.values_on_matching_grid();
    let mut v = [0.0; 2];
    for j in 0..=64 {
        kl.value(2.0 * j as f64 / 64.0, &mut v);
        for a in 0..2 {
            assert!((fast[j * 2 + a] - v[a]).abs() < 1e-12, "{j} {a}");
        }
    }
}

#[test]
fn karhunen_loeve_draws_are_nested() {
    let short = KarhunenLoeve::sample(8, 2, 3, 7).unwrap();
    let long = KarhunenLoeve::sample(64, 2, 3, 7).unwrap();
    for a in 0..2 {
        assert_eq!(short.coefficients(a), &long.coefficients(a)[..8]);
    }
}

#[test]
fn karhunen_loeve_variance_below_brownian() {
    let mut sq = Vec::new();
    for p in 0..4000 {
        let kl = KarhunenLoeve::sample(4, 1, 2, p).unwrap();
        let mut v = [0.0];
        kl.value(1.0, &mut v);
        sq.push(v[0] * v[0]);
    }
    let exact: f64 = (0..4)
        .map(|k| {
            let w = (k as f64 + 0.5) * std::f64::consts::PI;
            2.0 * (w.sin() / w).powi(2)
        })
        .sum();
    let (m, se) = mean_and_se(&sq);
    assert!((m - exact).abs() < 4.0 * se);
    assert!(exact < 1.0);
}

#[test]
fn smooth_lifts_are_geometric() {
    let grid = unit(128);
    let kl = karhunen_loeve_lift(16, &grid, 2, 1, 4, KlScaling::Unit, 0.4).unwrap();
    assert!(check_chen(&kl, 1e-10).passed);
    assert!(check_geometric(&kl, 1e-10).passed);
    let fine = sample_brownian_path(&grid, 2, 1, 0).unwrap().bridge_refine(8).unwrap();
    let mo = mollified_lift(&fine, 0.05, &grid, 4, 0.4).unwrap();
    assert!(check_chen(&mo, 1e-10).passed);
    assert!(check_geometric(&mo, 1e-10).passed);
}

#[test]
fn mollifier_weights_are_normalised_and_local() {
    let grid = unit(64);
    let fine = sample_brownian_path(&grid, 1, 1, 0).unwrap();
    let path = MollifiedPath::new(&fine, 0.1).unwrap();
    for t in [0.0, 0.3, 0.97, 1.0] {
        let w = path.weights(t);
        let total: f64 = w.iter().map(|(_, x)| x).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(w.iter().all(|&(j, x)| x > 0.0 && ((j as f64) / 64.0 - t).abs() < 0.1));
    }
    assert!(MollifiedPath::new(&fine, 0.02).is_err());
}

#[test]
fn wong_zakai_interpolates_coarse_points_exactly() {
    let grid = unit(64);
    let w = sample_brownian_path(&grid, 2, 9, 0).unwrap();
    let coarse = w.subsample(8).unwrap();
    let vals = interpolate_linear(&coarse, &grid).unwrap();
    for k in 0..=8 {
        assert_eq!(&vals[16 * k..16 * k + 2], coarse.value(k));
    }
    // midpoint of the first coarse cell
    let mid = 0.5 * (coarse.value(0)[0] + coarse.value(1)[0]);
    assert!((vals[8] - mid).abs() < 1e-15);
    let rp = wong_zakai_lift(&coarse, &grid, 0.4).unwrap();
    assert!(check_geometric(&rp, 1e-12).passed);
    assert!(interpolate_linear(&coarse, &unit(60)).is_err());
}

#[test]
fn every_family_shares_the_brownian_draw() {
    let grid = unit(64);
    let base = NoiseSpec::new(NoiseFamily::BrownianStrat, 2, 44);
    let reference = base.reference_lift(&grid, 5).unwrap();
    for fam in [
        NoiseFamily::BrownianIto,
        NoiseFamily::WongZakai { n: 16 },
        NoiseFamily::Mollified { bandwidth: 0.05 },
    ] {
        let spec = base.with_family(fam);
        assert_eq!(spec.brownian(&grid, 5).unwrap().values(), base.brownian(&grid, 5).unwrap().values());
        let r = spec.reference_lift(&grid, 5).unwrap();
        assert_eq!(r.increments(), reference.increments());
        assert_eq!(r.second_level(), reference.second_level());
    }
    let ito = base.with_family(NoiseFamily::BrownianIto).lift(&grid, 5).unwrap();
    assert_eq!(ito.increments(), reference.increments());
}

#[test]
fn wong_zakai_distance_shrinks_with_refinement() {
    let grid = unit(256);
    let base = NoiseSpec::new(NoiseFamily::WongZakai { n: 4 }, 2, 3);
    let reference = base.reference_lift(&grid, 0).unwrap();
    let dist: Vec<f64> = [4, 16, 64, 256]
        .iter()
        .map(|&n| {
            let lift = base.with_family(NoiseFamily::WongZakai { n }).lift(&grid, 0).unwrap();
            rough_distance(&lift, &reference, PairSet::All).unwrap().total()
        })
        .collect();
    assert!(dist.windows(2).all(|w| w[1] < w[0]), "{dist:?}");
    let sup: Vec<f64> = [4, 256]
        .iter()
        .map(|&n| {
            let lift = base.with_family(NoiseFamily::WongZakai { n }).lift(&grid, 0).unwrap();
            sup_distance(&lift, &reference).unwrap()
        })
        .collect();
    assert!(sup[1] < sup[0]);
}

#[test]
fn spec_round_trips_through_json() {
    let spec = NoiseSpec::new(NoiseFamily::Fbm { hurst: 0.45 }, 3, 17);
    let text = serde_json::to_string(&spec).unwrap();
    assert!(text.contains("\"family\":\"fbm\""));
    let back: NoiseSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
}
