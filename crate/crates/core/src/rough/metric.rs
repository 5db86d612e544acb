//! The inhomogeneous `(α, 2α)` Hölder seminorm, the induced rough distance,
//! and algebraic validity checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::path::{RoughPath, Signature};

/// Above this many cells the automatic pair set switches to dyadic pairs.
pub const ALL_PAIRS_LIMIT: usize = 4096;

const CHECK_SAMPLES: usize = 1000;
const CHECK_SEED: u64 = 0x5eed_c4e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSet {
    /// Every grid pair `(s, t)`, `O(N²)`.
    All,
    /// Pairs whose index gap is a power of two; a lower bound of `All`.
    Dyadic,
    /// `All` up to [`ALL_PAIRS_LIMIT`] cells, `Dyadic` above.
    Auto,
}

impl PairSet {
    fn resolve(self, cells: usize) -> PairSet {
        match self {
            PairSet::Auto if cells <= ALL_PAIRS_LIMIT => PairSet::All,
            PairSet::Auto => PairSet::Dyadic,
            other => other,
        }
    }
}

/// Both terms of the seminorm, kept apart so homogeneity can be checked per level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Seminorm {
    /// `sup |X_{s,t}| / |t-s|^α`
    pub first: f64,
    /// `sup |𝕏_{s,t}| / |t-s|^{2α}`
    pub second: f64,
    /// Pair set actually used.
    pub pairs: PairSet,
}

impl Seminorm {
    pub fn total(&self) -> f64 {
        self.first + self.second
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Sup over the chosen pair set of the seminorm of `a - b` (or of `a` alone).
fn sup_over_pairs(a: &RoughPath, b: Option<&RoughPath>, pairs: PairSet) -> Seminorm {
    let n = a.cells();
    let d = a.dim();
    let alpha = a.hoelder();
    let t = a.grid().points();
    let pairs = pairs.resolve(n);
    let zero = vec![0.0; d * d];
    let (mut first, mut second) = (0.0f64, 0.0f64);
    let mut update = |dt: f64, xa: &[f64], xxa: &[f64], xb: &[f64], xxb: &[f64]| {
        let w = dt.powf(alpha);
        first = first.max(diff_norm(xa, xb) / w);
        second = second.max(diff_norm(xxa, xxb) / (w * w));
    };

    match pairs {
        PairSet::All | PairSet::Auto => {
            let mut sa = Signature::zero(d);
            let mut sb = Signature::zero(d);
            for i in 0..n {
                sa.reset();
                sb.reset();
                for j in i..n {
                    sa.push(a.cell_increment(j), a.cell_second_level(j));
                    if let Some(b) = b {
                        sb.push(b.cell_increment(j), b.cell_second_level(j));
                    }
                    update(t[j + 1] - t[i], &sa.inc, &sa.sec, &sb.inc, &sb.sec);
                }
            }
        }
        PairSet::Dyadic => {
            let (mut xa, mut xxa) = (vec![0.0; d], vec![0.0; d * d]);
            let (mut xb, mut xxb) = (vec![0.0; d], zero.clone());
            for i in 0..n {
                let mut gap = 1;
                while i + gap <= n {
                    let j = i + gap;
                    a.pair_from_prefix(i, j, &mut xa, &mut xxa);
                    if let Some(b) = b {
                        b.pair_from_prefix(i, j, &mut xb, &mut xxb);
                    }
                    update(t[j] - t[i], &xa, &xxa, &xb, &xxb);
                    gap *= 2;
                }
            }
        }
    }
    Seminorm {
        first,
        second,
        pairs,
    }
}

/// `‖X‖_{α,2α}` over grid pairs, with `α` the path's Hölder exponent.
pub fn rough_seminorm(rp: &RoughPath, pairs: PairSet) -> Seminorm {
    sup_over_pairs(rp, None, pairs)
}

/// Seminorm of the level-wise difference `(X_a - X_b, 𝕏_a - 𝕏_b)` on a common grid.
pub fn rough_distance(a: &RoughPath, b: &RoughPath, pairs: PairSet) -> Result<Seminorm> {
    ensure_comparable(a, b)?;
    Ok(sup_over_pairs(a, Some(b), pairs))
}

/// Largest Euclidean distance between the two paths' values at grid points.
pub fn sup_distance(a: &RoughPath, b: &RoughPath) -> Result<f64> {
    ensure_comparable(a, b)?;
    let d = a.dim();
    Ok(a.values()
        .chunks(d)
        .zip(b.values().chunks(d))
        .map(|(x, y)| diff_norm(x, y))
        .fold(0.0, f64::max))
}

fn ensure_comparable(a: &RoughPath, b: &RoughPath) -> Result<()> {
    if !a.aligned_with(b) {
        return Err(Error::Mismatch(format!(
            "paths differ in grid or dimension ({} vs {} cells, dim {} vs {})",
            a.cells(),
            b.cells(),
            a.dim(),
            b.dim()
        )));
    }
    if a.hoelder() != b.hoelder() {
        return Err(Error::Mismatch(format!(
            "Hölder exponents differ: {} vs {}",
            a.hoelder(),
            b.hoelder()
        )));
    }
    Ok(())
}

/// Outcome of an algebraic self-check. `passed` compares `residual` against
/// `tolerance × scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckReport {
    pub residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(residual: f64, scale: f64, tolerance: f64) -> Self {
        Self {
            residual,
            scale,
            tolerance,
            passed: residual <= tolerance * scale,
        }
    }
}

fn random_triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out: Vec<_> = (0..n.saturating_sub(1)).map(|k| (k, k + 1, k + 2)).collect();
    if n >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
        for _ in 0..CHECK_SAMPLES {
            let mut v = [rng.random_range(0..=n), rng.random_range(0..=n), rng.random_range(0..=n)];
            v.sort_unstable();
            if v[0] < v[1] && v[1] < v[2] {
                out.push((v[0], v[1], v[2]));
            }
        }
    }
    out
}

/// Max over sampled triples `i < u < j` of
/// `|𝕏_{i,j} - 𝕏_{i,u} - 𝕏_{u,j} - X_{i,u} ⊗ X_{u,j}|`, where the outer pair
/// comes from the cached running signature and the parts from the stored cells.
/// `tol` is relative to `1 + max |𝕏_{i,j}|`.
pub fn check_chen(rp: &RoughPath, tol: f64) -> CheckReport {
    let d = rp.dim();
    let (mut x, mut xx) = (vec![0.0; d], vec![0.0; d * d]);
    let (mut residual, mut scale) = (0.0f64, 0.0f64);
    for (i, u, j) in random_triples(rp.cells()) {
        rp.pair_from_prefix(i, j, &mut x, &mut xx);
        let (x1, xx1) = rp.chen_extend(i, u).expect("ordered triple");
        let (x2, xx2) = rp.chen_extend(u, j).expect("ordered triple");
        let mut r = 0.0;
        for a in 0..d {
            for b in 0..d {
                let e = xx[a * d + b] - xx1[a * d + b] - xx2[a * d + b] - x1[a] * x2[b];
                r += e * e;
            }
        }
        residual = residual.max(r.sqrt());
        scale = scale.max(norm(&xx));
    }
    CheckReport::new(residual, 1.0 + scale, tol)
}

/// Max over cells and sampled pairs of `|½(𝕏 + 𝕏ᵀ) - ½ X ⊗ X|`, relative to
/// `1 + max |X|²`.
pub fn check_geometric(rp: &RoughPath, tol: f64) -> CheckReport {
    let d = rp.dim();
    let n = rp.cells();
    let (mut x, mut xx) = (vec![0.0; d], vec![0.0; d * d]);
    let (mut residual, mut scale) = (0.0f64, 0.0f64);
    let mut eval = |x: &[f64], xx: &[f64]| {
        let mut r = 0.0;
        for a in 0..d {
            for b in 0..d {
                let e = 0.5 * (xx[a * d + b] + xx[b * d + a]) - 0.5 * x[a] * x[b];
                r += e * e;
            }
        }
        residual = residual.max(r.sqrt());
        scale = scale.max(x.iter().map(|v| v * v).sum());
    };
    for k in 0..n {
        eval(rp.cell_increment(k), rp.cell_second_level(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED ^ 1);
    for _ in 0..CHECK_SAMPLES {
        let (a, b) = (rng.random_range(0..=n), rng.random_range(0..=n));
        if a != b {
            rp.pair_from_prefix(a.min(b), a.max(b), &mut x, &mut xx);
            eval(&x, &xx);
        }
    }
    CheckReport::new(residual, 1.0 + scale, tol)
}
