//! Lipschitz Markov feedback policies on a uniform state grid, optionally
//! time-dependent, stored as node values and evaluated by clamped
//! piecewise-linear (or bilinear) interpolation.

mod io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_finite, Error, Result};
use crate::mollifier::symmetric_rule;
use crate::rde::Feedback;

pub use io::{read_policy, write_policy};

/// Headroom applied to the measured slope of a mollified policy.
pub const CERTIFICATE_HEADROOM: f64 = 1.25;

/// A uniform axis `lo, lo + h, ..., hi` with `nodes` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::param("axis", format!("need lo < hi and at least 2 nodes, got [{lo}, {hi}] with {nodes}")));
        }
        Ok(Self { lo, hi, nodes })
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.nodes - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.nodes {
            self.hi
        } else {
            self.lo + self.spacing() * i as f64
        }
    }

    /// Left node index and weight of the right node, clamped to the axis.
    fn bracket(&self, x: f64) -> (usize, f64) {
        if !(x > self.lo) {
            return (0, 0.0);
        }
        if x >= self.hi {
            return (self.nodes - 2, 1.0);
        }
        let s = (x - self.lo) / self.spacing();
        let i = (s.floor() as usize).min(self.nodes - 2);
        (i, s - i as f64)
    }
}

/// Result of checking `|h(p) - h(q)| ≤ M·dist(p, q)` on random pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzCheck {
    pub pairs: usize,
    pub worst_ratio: f64,
    pub constant: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzPolicy {
    state: Axis,
    time: Option<Axis>,
    values: Vec<f64>,
    bounds: (f64, f64),
    certified_state: f64,
    certified_time: f64,
}

impl LipschitzPolicy {
    /// Wraps a stationary selector given at the nodes of `[-half_width, half_width]`.
    /// Values are clamped to `bounds`; the certified constant is the raw slope.
    pub fn from_selector(half_width: f64, values: Vec<f64>, bounds: (f64, f64)) -> Result<Self> {
        let state = Axis::new(-half_width, half_width, values.len())?;
        Self::build(state, None, values, bounds)
    }

    /// Time-dependent selector: `values` holds one row of state nodes per
    /// time node of `[0, horizon]`.
    pub fn from_time_selector(
        half_width: f64,
        state_nodes: usize,
        horizon: f64,
        time_nodes: usize,
        values: Vec<f64>,
        bounds: (f64, f64),
    ) -> Result<Self> {
        let state = Axis::new(-half_width, half_width, state_nodes)?;
        let time = Axis::new(0.0, horizon, time_nodes)?;
        Self::build(state, Some(time), values, bounds)
    }

    fn build(state: Axis, time: Option<Axis>, mut values: Vec<f64>, bounds: (f64, f64)) -> Result<Self> {
        if !(bounds.0 <= bounds.1) || !bounds.0.is_finite() || !bounds.1.is_finite() {
            return Err(Error::param("bounds", "need a finite interval lo ≤ hi"));
        }
        let rows = time.map_or(1, |t| t.nodes);
        if values.len() != rows * state.nodes {
            return Err(Error::Mismatch(format!(
                "{} node values for a {rows} × {} grid",
                values.len(),
                state.nodes
            )));
        }
        ensure_finite("policy values", &values)?;
        for v in &mut values {
            *v = v.clamp(bounds.0, bounds.1);
        }
        let mut p = Self {
            state,
            time,
            values,
            bounds,
            certified_state: 0.0,
            certified_time: 0.0,
        };
        p.certified_state = p.raw_state_slope();
        p.certified_time = p.raw_time_slope();
        Ok(p)
    }

    pub(crate) fn with_certificates(mut self, state: f64, time: f64) -> Result<Self> {
        if state < self.raw_state_slope() || time < self.raw_time_slope() {
            return Err(Error::Certification {
                constant: state.max(time),
                limit: self.raw_state_slope().max(self.raw_time_slope()),
            });
        }
        self.certified_state = state;
        self.certified_time = time;
        Ok(self)
    }

    pub fn state_axis(&self) -> Axis {
        self.state
    }

    pub fn time_axis(&self) -> Option<Axis> {
        self.time
    }

    pub fn is_time_varying(&self) -> bool {
        self.time.is_some()
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.state.nodes..(j + 1) * self.state.nodes]
    }

    fn rows(&self) -> usize {
        self.time.map_or(1, |t| t.nodes)
    }

    /// Largest `|v_{i+1} - v_i| / h` over adjacent state nodes.
    pub fn raw_state_slope(&self) -> f64 {
        let h = self.state.spacing();
        (0..self.rows())
            .flat_map(|j| self.row(j).windows(2).map(move |w| (w[1] - w[0]).abs() / h))
            .fold(0.0, f64::max)
    }

    /// Largest slope between adjacent time nodes; `0` for stationary policies.
    pub fn raw_time_slope(&self) -> f64 {
        let Some(t) = self.time else { return 0.0 };
        let h = t.spacing();
        let n = self.state.nodes;
        (0..t.nodes - 1)
            .flat_map(|j| (0..n).map(move |i| (j, i)))
            .map(|(j, i)| (self.values[(j + 1) * n + i] - self.values[j * n + i]).abs() / h)
            .fold(0.0, f64::max)
    }

    pub fn certified_lipschitz(&self) -> f64 {
        self.certified_state
    }

    pub fn certified_time_lipschitz(&self) -> f64 {
        self.certified_time
    }

    /// One constant bounding `|h(t₁,x) - h(t₂,y)| / (|t₁-t₂| + |x-y|)`.
    pub fn certified_joint(&self) -> f64 {
        self.certified_state.max(self.certified_time)
    }

    fn interpolate_row(&self, j: usize, x: f64) -> f64 {
        let (i, w) = self.state.bracket(x);
        let r = self.row(j);
        (1.0 - w) * r[i] + w * r[i + 1]
    }

    pub fn evaluate(&self, t: f64, x: f64) -> f64 {
        match self.time {
            None => self.interpolate_row(0, x),
            Some(axis) => {
                let (j, w) = axis.bracket(t);
                let a = self.interpolate_row(j, x);
                let b = self.interpolate_row(j + 1, x);
                (1.0 - w) * a + w * b
            }
        }
    }

    /// Convolution in the state variable with the bump kernel of half-width
    /// `bandwidth`, evaluated at each node by a normalised symmetric rule.
    ///
    /// The result's certified constant is `1.25 ×` its measured slope, capped
    /// by the measured slope of the input.
    pub fn mollify(&self, bandwidth: f64) -> Result<Self> {
        let h = self.state.spacing();
        if !(bandwidth > h) || !bandwidth.is_finite() {
            return Err(Error::param(
                "bandwidth",
                format!("{bandwidth} does not exceed the grid spacing {h}"),
            ));
        }
        let points = (16.0 * bandwidth / h).ceil().max(64.0) as usize;
        let rule = symmetric_rule(points);
        let n = self.state.nodes;
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.rows() {
            for i in 0..n {
                let x = self.state.node(i);
                let v: f64 = rule
                    .iter()
                    .map(|&(y, w)| w * self.interpolate_row(j, x - bandwidth * y))
                    .sum();
                values.push(v);
            }
        }
        let smoothed = Self::build(self.state, self.time, values, self.bounds)?;
        let cap = |new: f64, old: f64| (CERTIFICATE_HEADROOM * new).min(old).max(new);
        let state = cap(smoothed.raw_state_slope(), self.raw_state_slope());
        let time = cap(smoothed.raw_time_slope(), self.raw_time_slope());
        smoothed.with_certificates(state, time)
    }

    /// Fails if the certified joint constant exceeds `limit`.
    pub fn certify(&self, limit: f64) -> Result<()> {
        let constant = self.certified_joint();
        if constant > limit {
            return Err(Error::Certification { constant, limit });
        }
        Ok(())
    }

    /// Samples `pairs` random point pairs (including points outside the
    /// state box) and checks the Lipschitz inequality with the certified
    /// constant, allowing for rounding.
    pub fn check_lipschitz(&self, pairs: usize, seed: u64) -> LipschitzCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (self.state.lo, self.state.hi);
        let pad = 0.1 * (hi - lo);
        let horizon = self.time.map_or(0.0, |t| t.hi);
        let constant = self.certified_joint();
        let mut worst: f64 = 0.0;
        let mut passed = true;
        for _ in 0..pairs {
            let x = rng.random_range(lo - pad..hi + pad);
            // half the pairs are close together so that kinks are probed
            let y = if rng.random_bool(0.5) {
                x + rng.random_range(-0.5..0.5) * self.state.spacing()
            } else {
                rng.random_range(lo - pad..hi + pad)
            };
            let (s, t) = if horizon > 0.0 {
                (rng.random_range(0.0..horizon), rng.random_range(0.0..horizon))
            } else {
                (0.0, 0.0)
            };
            let dist = (x - y).abs() + (s - t).abs();
            let diff = (self.evaluate(s, x) - self.evaluate(t, y)).abs();
            if dist > 0.0 {
                worst = worst.max(diff / dist);
            }
            if diff > constant * dist + 1e-12 {
                passed = false;
            }
        }
        LipschitzCheck {
            pairs,
            worst_ratio: worst,
            constant,
            passed,
        }
    }
}

impl Feedback for LipschitzPolicy {
    fn action(&self, t: f64, x: &[f64]) -> f64 {
        self.evaluate(t, x[0])
    }
}
