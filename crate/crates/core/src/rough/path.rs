//! Grid-sampled level-2 rough paths.

use crate::error::{ensure_finite, Error, Result};
use crate::grid::TimeGrid;

/// Default Hölder exponent, inside the level-2 regime `(1/3, 1/2]`.
pub const DEFAULT_HOELDER: f64 = 0.4;

/// A level-2 rough path stored on the cells of a [`TimeGrid`].
///
/// Only consecutive-cell values `X_{t_k,t_{k+1}}` and `𝕏_{t_k,t_{k+1}}` are
/// data; every other pair is obtained through Chen's relation. Second-level
/// matrices are row-major with entry `(i, j) = ∫ X^i_{s,r} dX^j_r`.
///
/// A running signature `(X_{t_0,t_k}, 𝕏_{t_0,t_k})` is cached at construction
/// for O(1) pair queries. [`RoughPath::check_chen`] compares the two routes.
#[derive(Debug, Clone)]
pub struct RoughPath {
    grid: TimeGrid,
    dim: usize,
    hoelder: f64,
    increments: Vec<f64>,
    second: Vec<f64>,
    prefix_inc: Vec<f64>,
    prefix_sec: Vec<f64>,
}

pub(crate) fn outer_add(out: &mut [f64], a: &[f64], b: &[f64]) {
    let d = a.len();
    for i in 0..d {
        let ai = a[i];
        let row = &mut out[i * d..(i + 1) * d];
        for (o, bj) in row.iter_mut().zip(b) {
            *o += ai * bj;
        }
    }
}

/// Running two-level signature built cell by cell with Chen's relation.
#[derive(Debug, Clone)]
pub(crate) struct Signature {
    pub inc: Vec<f64>,
    pub sec: Vec<f64>,
}

impl Signature {
    pub fn zero(dim: usize) -> Self {
        Self {
            inc: vec![0.0; dim],
            sec: vec![0.0; dim * dim],
        }
    }

    pub fn reset(&mut self) {
        self.inc.fill(0.0);
        self.sec.fill(0.0);
    }

    pub fn push(&mut self, x: &[f64], xx: &[f64]) {
        for (s, v) in self.sec.iter_mut().zip(xx) {
            *s += v;
        }
        outer_add(&mut self.sec, &self.inc, x);
        for (s, v) in self.inc.iter_mut().zip(x) {
            *s += v;
        }
    }
}

pub(crate) fn check_hoelder(hoelder: f64) -> Result<()> {
    if hoelder > 1.0 / 3.0 && hoelder <= 0.5 {
        Ok(())
    } else {
        Err(Error::param("hoelder", format!("{hoelder} not in (1/3, 1/2]")))
    }
}

impl RoughPath {
    /// Builds a path from per-cell levels (`cells × dim` increments,
    /// `cells × dim × dim` second-level entries).
    pub fn from_cells(
        grid: TimeGrid,
        dim: usize,
        increments: Vec<f64>,
        second: Vec<f64>,
        hoelder: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be positive"));
        }
        check_hoelder(hoelder)?;
        let n = grid.cells();
        if increments.len() != n * dim || second.len() != n * dim * dim {
            return Err(Error::Mismatch(format!(
                "{n} cells of dimension {dim} need {} increments and {} second-level entries, got {} and {}",
                n * dim,
                n * dim * dim,
                increments.len(),
                second.len()
            )));
        }
        ensure_finite("increments", &increments)?;
        ensure_finite("second level", &second)?;

        let mut prefix_inc = Vec::with_capacity((n + 1) * dim);
        let mut prefix_sec = Vec::with_capacity((n + 1) * dim * dim);
        let mut sig = Signature::zero(dim);
        prefix_inc.extend_from_slice(&sig.inc);
        prefix_sec.extend_from_slice(&sig.sec);
        for k in 0..n {
            sig.push(
                &increments[k * dim..(k + 1) * dim],
                &second[k * dim * dim..(k + 1) * dim * dim],
            );
            prefix_inc.extend_from_slice(&sig.inc);
            prefix_sec.extend_from_slice(&sig.sec);
        }
        Ok(Self {
            grid,
            dim,
            hoelder,
            increments,
            second,
            prefix_inc,
            prefix_sec,
        })
    }

    /// The path with all levels zero.
    pub fn zero(grid: TimeGrid, dim: usize, hoelder: f64) -> Result<Self> {
        let n = grid.cells();
        Self::from_cells(grid, dim, vec![0.0; n * dim], vec![0.0; n * dim * dim], hoelder)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hoelder(&self) -> f64 {
        self.hoelder
    }

    pub fn cells(&self) -> usize {
        self.grid.cells()
    }

    pub fn cell_increment(&self, k: usize) -> &[f64] {
        &self.increments[k * self.dim..(k + 1) * self.dim]
    }

    pub fn cell_second_level(&self, k: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.second[k * dd..(k + 1) * dd]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn second_level(&self) -> &[f64] {
        &self.second
    }

    /// Path values `X_{t_0,t_k}` for `k = 0..=N`, flattened `(N+1) × dim`.
    pub fn values(&self) -> &[f64] {
        &self.prefix_inc
    }

    /// `(X_{t_i,t_j}, 𝕏_{t_i,t_j})` by Chen's relation over cells `i..j`.
    pub fn chen_extend(&self, i: usize, j: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if i >= j || j > self.cells() {
            return Err(Error::Ordering { i, j });
        }
        let mut sig = Signature::zero(self.dim);
        for k in i..j {
            sig.push(self.cell_increment(k), self.cell_second_level(k));
        }
        Ok((sig.inc, sig.sec))
    }

    /// Same pair as [`chen_extend`](Self::chen_extend) read from the cached
    /// running signature. Writes into the caller's buffers.
    pub(crate) fn pair_from_prefix(&self, i: usize, j: usize, inc: &mut [f64], sec: &mut [f64]) {
        let d = self.dim;
        let dd = d * d;
        let (pi, pj) = (&self.prefix_inc[i * d..(i + 1) * d], &self.prefix_inc[j * d..(j + 1) * d]);
        for a in 0..d {
            inc[a] = pj[a] - pi[a];
        }
        let (si, sj) = (&self.prefix_sec[i * dd..(i + 1) * dd], &self.prefix_sec[j * dd..(j + 1) * dd]);
        for a in 0..d {
            for b in 0..d {
                sec[a * d + b] = sj[a * d + b] - si[a * d + b] - pi[a] * inc[b];
            }
        }
    }

    /// Merges every `factor` consecutive cells into one by Chen's relation.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsen(factor)?;
        let n = grid.cells();
        let d = self.dim;
        let mut increments = Vec::with_capacity(n * d);
        let mut second = Vec::with_capacity(n * d * d);
        let mut sig = Signature::zero(d);
        for big in 0..n {
            sig.reset();
            for k in big * factor..(big + 1) * factor {
                sig.push(self.cell_increment(k), self.cell_second_level(k));
            }
            increments.extend_from_slice(&sig.inc);
            second.extend_from_slice(&sig.sec);
        }
        Self::from_cells(grid, d, increments, second, self.hoelder)
    }

    /// Dilation: first level times `lambda`, second level times `lambda²`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        Self::from_cells(
            self.grid.clone(),
            self.dim,
            self.increments.iter().map(|v| v * lambda).collect(),
            self.second.iter().map(|v| v * lambda * lambda).collect(),
            self.hoelder,
        )
    }

    pub fn with_hoelder(&self, hoelder: f64) -> Result<Self> {
        check_hoelder(hoelder)?;
        let mut out = self.clone();
        out.hoelder = hoelder;
        Ok(out)
    }

    fn shift_diagonal(&self, sign: f64) -> Result<Self> {
        let d = self.dim;
        let mut second = self.second.clone();
        for k in 0..self.cells() {
            let half_dt = 0.5 * self.grid.step(k);
            for a in 0..d {
                second[k * d * d + a * d + a] += sign * half_dt;
            }
        }
        Self::from_cells(self.grid.clone(), d, self.increments.clone(), second, self.hoelder)
    }

    /// Interprets `self` as an Itô lift and adds `½ (t_{k+1} - t_k) I` on every cell.
    pub fn ito_to_stratonovich(&self) -> Result<Self> {
        self.shift_diagonal(1.0)
    }

    /// Inverse of [`ito_to_stratonovich`](Self::ito_to_stratonovich).
    pub fn stratonovich_to_ito(&self) -> Result<Self> {
        self.shift_diagonal(-1.0)
    }

    /// Perturbs one stored cell entry without refreshing the cached running
    /// signature. Used by validation fixtures to exercise [`check_chen`](crate::rough::check_chen).
    pub fn corrupt_cell_second_level(&mut self, k: usize, a: usize, b: usize, delta: f64) {
        let d = self.dim;
        self.second[k * d * d + a * d + b] += delta;
    }

    /// True when both paths live on bit-identical grids with the same dimension.
    pub fn aligned_with(&self, other: &RoughPath) -> bool {
        self.dim == other.dim && self.grid == other.grid
    }
}
