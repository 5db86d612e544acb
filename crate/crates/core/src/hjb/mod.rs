//! Finite-difference solvers for the one-dimensional discounted and
//! finite-horizon Hamilton-Jacobi-Bellman equations
//!
//! ```text
//! min_u [ a V'' + b̂(·, u) V' + c(·, u) ] = α V
//! ∂_t ψ + min_u [ a ψ'' + b̂(·, u) ψ' + c(·, u) ] = 0,   ψ(T) = terminal cost
//! ```
//!
//! on `[-L, L]` with reflecting (zero-slope) boundaries, using upwind
//! differences for the drift so that both schemes are monotone.

mod model;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::LipschitzPolicy;

pub use model::{ControlFn, ModelDiagnostics, ModelPreset, ModelSpec, StateFn};

pub const MAX_POLICY_ITERATIONS: usize = 100;
/// Largest `time nodes × state nodes` table the finite-horizon solver builds.
pub const TABLE_LIMIT: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    /// The solver's own one-sided drift differences.
    Upwind,
    /// Central drift differences: measures consistency with the continuous
    /// equation rather than with the scheme.
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    Discounted { discount: f64 },
    FiniteHorizon { horizon: f64, time_nodes: usize },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Largest action change in the last policy update.
    pub policy_change: f64,
    pub linear_residual: f64,
    /// Policy change per iteration.
    pub history: Vec<f64>,
    /// Explicit substeps per output time step.
    pub substeps: usize,
}

/// Values and minimising selector on the state grid (one row per time node
/// for finite-horizon problems, row 0 at `t = 0`).
#[derive(Debug, Clone)]
pub struct ValueFunction {
    pub criterion: Criterion,
    pub half_width: f64,
    pub nx: usize,
    pub nu: usize,
    pub values: Vec<f64>,
    pub selector: Vec<f64>,
    pub report: SolveReport,
}

impl ValueFunction {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.nx - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.half_width
        } else {
            -self.half_width + self.spacing() * i as f64
        }
    }

    pub fn rows(&self) -> usize {
        match self.criterion {
            Criterion::Discounted { .. } => 1,
            Criterion::FiniteHorizon { time_nodes, .. } => time_nodes,
        }
    }

    pub fn time(&self, j: usize) -> f64 {
        match self.criterion {
            Criterion::Discounted { .. } => 0.0,
            Criterion::FiniteHorizon { horizon, time_nodes } => horizon * j as f64 / (time_nodes - 1) as f64,
        }
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.nx..(j + 1) * self.nx]
    }

    pub fn selector_row(&self, j: usize) -> &[f64] {
        &self.selector[j * self.nx..(j + 1) * self.nx]
    }

    /// Linear interpolation of row `j` at `x`, clamped to the box.
    pub fn value_at(&self, j: usize, x: f64) -> f64 {
        let s = ((x + self.half_width) / self.spacing()).clamp(0.0, (self.nx - 1) as f64);
        let i = (s.floor() as usize).min(self.nx - 2);
        let w = s - i as f64;
        let r = self.row(j);
        (1.0 - w) * r[i] + w * r[i + 1]
    }

    /// The selector as a (possibly discontinuous) clamped piecewise-linear policy.
    pub fn to_policy(&self, actions: (f64, f64)) -> Result<LipschitzPolicy> {
        match self.criterion {
            Criterion::Discounted { .. } => {
                LipschitzPolicy::from_selector(self.half_width, self.selector.clone(), actions)
            }
            Criterion::FiniteHorizon { horizon, time_nodes } => LipschitzPolicy::from_time_selector(
                self.half_width,
                self.nx,
                horizon,
                time_nodes,
                self.selector.clone(),
                actions,
            ),
        }
    }

    /// CSV table `t,x,value,selector`.
    pub fn to_table(&self) -> String {
        let mut s = String::from("t,x,value,selector\n");
        for j in 0..self.rows() {
            for i in 0..self.nx {
                let _ = writeln!(
                    s,
                    "{:?},{:?},{:?},{:?}",
                    self.time(j),
                    self.x(i),
                    self.values[j * self.nx + i],
                    self.selector[j * self.nx + i]
                );
            }
        }
        s
    }
}

/// Coefficients of the discrete operator sampled once per solve.
struct Tables {
    h: f64,
    nx: usize,
    actions: Vec<f64>,
    diffusion: Vec<f64>,
    drift: Vec<f64>,
    cost: Vec<f64>,
}

impl Tables {
    fn new(ms: &ModelSpec, nx: usize, nu: usize) -> Result<Self> {
        if nx < 3 {
            return Err(Error::param("nx", "need at least 3 state nodes"));
        }
        if nu == 0 {
            return Err(Error::param("nu", "need at least 1 action"));
        }
        let h = 2.0 * ms.half_width / (nx - 1) as f64;
        let actions = ms.action_grid(nu);
        let nu = actions.len();
        let mut t = Self {
            h,
            nx,
            actions,
            diffusion: Vec::with_capacity(nx),
            drift: Vec::with_capacity(nx * nu),
            cost: Vec::with_capacity(nx * nu),
        };
        for i in 0..nx {
            let x = if i + 1 == nx { ms.half_width } else { -ms.half_width + h * i as f64 };
            t.diffusion.push(ms.diffusion_coefficient(x));
            for &u in &t.actions {
                t.drift.push(ms.corrected_drift(x, u));
                t.cost.push((ms.running_cost)(x, u));
            }
        }
        Ok(t)
    }

    fn nu(&self) -> usize {
        self.actions.len()
    }

    fn neighbours(&self, v: &[f64], i: usize) -> (f64, f64) {
        let left = if i == 0 { v[1] } else { v[i - 1] };
        let right = if i + 1 == self.nx { v[self.nx - 2] } else { v[i + 1] };
        (left, right)
    }

    /// `a V'' + b̂ V' + c` at node `i` for action index `k`.
    fn operator(&self, v: &[f64], i: usize, k: usize, stencil: Stencil) -> f64 {
        let (l, r) = self.neighbours(v, i);
        let h = self.h;
        let b = self.drift[i * self.nu() + k];
        let first = match stencil {
            Stencil::Upwind => b.max(0.0) * (r - v[i]) / h - (-b).max(0.0) * (v[i] - l) / h,
            Stencil::Centered => b * (r - l) / (2.0 * h),
        };
        self.diffusion[i] * (r - 2.0 * v[i] + l) / (h * h) + first + self.cost[i * self.nu() + k]
    }

    /// Minimum over actions with ties resolved toward the smaller action.
    fn minimise(&self, v: &[f64], i: usize, stencil: Stencil) -> (usize, f64) {
        let mut best = (0, self.operator(v, i, 0, stencil));
        for k in 1..self.nu() {
            let val = self.operator(v, i, k, stencil);
            if val < best.1 - 1e-12 * (1.0 + best.1.abs()) {
                best = (k, val);
            }
        }
        best
    }
}

/// Solves `l_i x_{i-1} + d_i x_i + u_i x_{i+1} = r_i`.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Policy iteration for the discounted equation.
pub fn solve_discounted(ms: &ModelSpec, nx: usize, nu: usize) -> Result<ValueFunction> {
    ms.validate(nx, nu)?;
    let t = Tables::new(ms, nx, nu)?;
    let (h, alpha, na) = (t.h, ms.discount, t.nu());
    let mut policy: Vec<usize> = (0..nx)
        .map(|i| {
            let row = &t.cost[i * na..(i + 1) * na];
            (1..na).fold(0, |best, k| if row[k] < row[best] { k } else { best })
        })
        .collect();
    let mut report = SolveReport::default();
    let (mut lower, mut diag, mut upper, mut rhs) = (vec![0.0; nx], vec![0.0; nx], vec![0.0; nx], vec![0.0; nx]);
    loop {
        for i in 0..nx {
            let k = policy[i];
            let b = t.drift[i * na + k];
            let a = t.diffusion[i] / (h * h);
            let (bp, bm) = (b.max(0.0) / h, (-b).max(0.0) / h);
            lower[i] = -(a + bm);
            upper[i] = -(a + bp);
            diag[i] = alpha + 2.0 * a + bp + bm;
            rhs[i] = t.cost[i * na + k];
        }
        // reflecting ghosts fold onto the inner neighbour
        upper[0] += lower[0];
        lower[0] = 0.0;
        lower[nx - 1] += upper[nx - 1];
        upper[nx - 1] = 0.0;
        let v = thomas(&lower, &diag, &upper, &rhs);
        report.linear_residual = (0..nx)
            .map(|i| {
                let mut s = diag[i] * v[i] - rhs[i];
                if i > 0 {
                    s += lower[i] * v[i - 1];
                }
                if i + 1 < nx {
                    s += upper[i] * v[i + 1];
                }
                s.abs()
            })
            .fold(0.0, f64::max);
        let next: Vec<usize> = (0..nx).map(|i| t.minimise(&v, i, Stencil::Upwind).0).collect();
        let change = policy
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (t.actions[a] - t.actions[b]).abs())
            .fold(0.0, f64::max);
        report.iterations += 1;
        report.policy_change = change;
        report.history.push(change);
        if change < 1e-9 && report.linear_residual < 1e-10 {
            let selector = policy.iter().map(|&k| t.actions[k]).collect();
            return Ok(ValueFunction {
                criterion: Criterion::Discounted { discount: alpha },
                half_width: ms.half_width,
                nx,
                nu,
                values: v,
                selector,
                report,
            });
        }
        if report.iterations >= MAX_POLICY_ITERATIONS {
            return Err(Error::NotConverged {
                solver: "policy iteration",
                iterations: report.iterations,
                history: report.history,
            });
        }
        policy = next;
    }
}

/// Explicit backward scheme for the finite-horizon equation on `nt` output
/// time steps, each split into enough substeps to satisfy the CFL bound
/// `Δt ≤ 0.9 / (2 max a / h² + max |b̂| / h)`.
pub fn solve_finite_horizon(ms: &ModelSpec, horizon: f64, nt: usize, nx: usize, nu: usize) -> Result<ValueFunction> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param("horizon", "must be positive"));
    }
    if nt == 0 {
        return Err(Error::param("nt", "need at least one time step"));
    }
    let cells = (nt + 1).saturating_mul(nx);
    if cells > TABLE_LIMIT {
        return Err(Error::MemoryGuard {
            cells,
            limit: TABLE_LIMIT,
        });
    }
    ms.validate(nx, nu)?;
    let t = Tables::new(ms, nx, nu)?;
    let h = t.h;
    let a_max = t.diffusion.iter().fold(0.0, |m: f64, &a| m.max(a));
    let b_max = t.drift.iter().fold(0.0, |m: f64, &b| m.max(b.abs()));
    let dt_out = horizon / nt as f64;
    let dt_cfl = 0.9 / (2.0 * a_max / (h * h) + b_max / h);
    let substeps = (dt_out / dt_cfl).ceil().max(1.0) as usize;
    let dt = dt_out / substeps as f64;

    let mut values = vec![0.0; (nt + 1) * nx];
    let mut selector = vec![0.0; (nt + 1) * nx];
    let mut psi: Vec<f64> = (0..nx)
        .map(|i| (ms.terminal_cost)(if i + 1 == nx { ms.half_width } else { -ms.half_width + h * i as f64 }))
        .collect();
    let mut next = psi.clone();
    let store = |j: usize, psi: &[f64], values: &mut [f64], selector: &mut [f64]| {
        values[j * nx..(j + 1) * nx].copy_from_slice(psi);
        for i in 0..nx {
            selector[j * nx + i] = t.actions[t.minimise(psi, i, Stencil::Upwind).0];
        }
    };
    store(nt, &psi, &mut values, &mut selector);
    for j in (0..nt).rev() {
        for _ in 0..substeps {
            for i in 0..nx {
                next[i] = psi[i] + dt * t.minimise(&psi, i, Stencil::Upwind).1;
            }
            std::mem::swap(&mut psi, &mut next);
        }
        crate::error::ensure_finite("finite-horizon values", &psi)?;
        store(j, &psi, &mut values, &mut selector);
    }
    Ok(ValueFunction {
        criterion: Criterion::FiniteHorizon {
            horizon,
            time_nodes: nt + 1,
        },
        half_width: ms.half_width,
        nx,
        nu,
        values,
        selector,
        report: SolveReport {
            iterations: nt * substeps,
            substeps,
            ..SolveReport::default()
        },
    })
}

/// Largest residual of the discrete equation at interior nodes, re-evaluated
/// from the model (minimum over the action grid of the stated stencil).
///
/// For finite-horizon solutions the time derivative is the forward
/// difference between stored rows.
pub fn hjb_residual(v: &ValueFunction, ms: &ModelSpec, stencil: Stencil) -> Result<f64> {
    if (ms.half_width - v.half_width).abs() > 1e-12 {
        return Err(Error::Mismatch("value function was computed on a different box".into()));
    }
    let t = Tables::new(ms, v.nx, v.nu)?;
    let interior = 1..v.nx - 1;
    match v.criterion {
        Criterion::Discounted { .. } => {
            let row = v.row(0);
            Ok(interior
                .map(|i| (t.minimise(row, i, stencil).1 - ms.discount * row[i]).abs())
                .fold(0.0, f64::max))
        }
        Criterion::FiniteHorizon { .. } => {
            let mut worst: f64 = 0.0;
            for j in 0..v.rows() - 1 {
                let dt = v.time(j + 1) - v.time(j);
                let (now, later) = (v.row(j), v.row(j + 1));
                for i in interior.clone() {
                    let r = (later[i] - now[i]) / dt + t.minimise(now, i, stencil).1;
                    worst = worst.max(r.abs());
                }
            }
            Ok(worst)
        }
    }
}

/// Value of following the selector of `v` in the discounted scheme, from
/// the linear equation alone.
pub fn policy_value(v: &ValueFunction, ms: &ModelSpec, selector: &[f64]) -> Result<Vec<f64>> {
    if selector.len() != v.nx {
        return Err(Error::Mismatch("selector length differs from the state grid".into()));
    }
    let nx = v.nx;
    let h = v.spacing();
    let (mut lower, mut diag, mut upper, mut rhs) = (vec![0.0; nx], vec![0.0; nx], vec![0.0; nx], vec![0.0; nx]);
    for i in 0..nx {
        let x = v.x(i);
        let b = ms.corrected_drift(x, selector[i]);
        let a = ms.diffusion_coefficient(x) / (h * h);
        let (bp, bm) = (b.max(0.0) / h, (-b).max(0.0) / h);
        lower[i] = -(a + bm);
        upper[i] = -(a + bp);
        diag[i] = ms.discount + 2.0 * a + bp + bm;
        rhs[i] = (ms.running_cost)(x, selector[i]);
    }
    upper[0] += lower[0];
    lower[0] = 0.0;
    lower[nx - 1] += upper[nx - 1];
    upper[nx - 1] = 0.0;
    Ok(thomas(&lower, &diag, &upper, &rhs))
}
