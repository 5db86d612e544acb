//! One-dimensional controlled models `dX = b(X, u) dt + σ(X) dW`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rde::VectorField;

pub type StateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ControlFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A scalar controlled diffusion with costs, a compact action interval and
/// a truncated state box `[-half_width, half_width]`.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    pub drift: ControlFn,
    pub diffusion: StateFn,
    /// `σ'`; a central difference is used when absent.
    pub diffusion_slope: Option<StateFn>,
    pub running_cost: ControlFn,
    pub terminal_cost: StateFn,
    /// `‖c‖_∞ ≤ cost_bound`.
    pub cost_bound: f64,
    pub discount: f64,
    pub actions: (f64, f64),
    pub half_width: f64,
    /// Lower bound required of `½σ²` on the box.
    pub diffusion_floor: f64,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("cost_bound", &self.cost_bound)
            .field("discount", &self.discount)
            .field("actions", &self.actions)
            .field("half_width", &self.half_width)
            .finish_non_exhaustive()
    }
}

/// Named models selectable from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelPreset {
    /// `b = u`, `σ = 1`, `c = min(x², 4) + 0.1u²`, terminal `min(x², 4)`.
    Symmetric,
    /// Any dynamics with a constant running cost and terminal cost.
    ConstantCost {
        cost: f64,
        #[serde(default)]
        terminal: f64,
        #[serde(default = "one")]
        discount: f64,
    },
    /// Control-free model `b = -tanh x`, `σ = 1 + 0.3 sin x`, `c = 1 - exp(-x²)`.
    Uncontrolled,
}

fn one() -> f64 {
    1.0
}

impl ModelPreset {
    pub fn build(&self) -> ModelSpec {
        match *self {
            ModelPreset::Symmetric => ModelSpec::symmetric(),
            ModelPreset::ConstantCost {
                cost,
                terminal,
                discount,
            } => ModelSpec::constant_cost(cost, terminal, discount),
            ModelPreset::Uncontrolled => ModelSpec::uncontrolled(),
        }
    }
}

impl ModelSpec {
    pub fn symmetric() -> Self {
        Self {
            name: "symmetric".into(),
            drift: Arc::new(|_, u| u),
            diffusion: Arc::new(|_| 1.0),
            diffusion_slope: Some(Arc::new(|_| 0.0)),
            running_cost: Arc::new(|x, u| (x * x).min(4.0) + 0.1 * u * u),
            terminal_cost: Arc::new(|x| (x * x).min(4.0)),
            cost_bound: 4.1,
            discount: 1.0,
            actions: (-1.0, 1.0),
            half_width: 6.0,
            diffusion_floor: 1e-8,
        }
    }

    pub fn constant_cost(cost: f64, terminal: f64, discount: f64) -> Self {
        Self {
            name: "constant-cost".into(),
            drift: Arc::new(|_, u| u),
            diffusion: Arc::new(|_| 1.0),
            diffusion_slope: Some(Arc::new(|_| 0.0)),
            running_cost: Arc::new(move |_, _| cost),
            terminal_cost: Arc::new(move |_| terminal),
            cost_bound: cost.abs(),
            discount,
            actions: (-1.0, 1.0),
            half_width: 6.0,
            diffusion_floor: 1e-8,
        }
    }

    pub fn uncontrolled() -> Self {
        Self {
            name: "uncontrolled".into(),
            drift: Arc::new(|x, _| -x.tanh()),
            diffusion: Arc::new(|x| 1.0 + 0.3 * x.sin()),
            diffusion_slope: Some(Arc::new(|x| 0.3 * x.cos())),
            running_cost: Arc::new(|x, _| 1.0 - (-x * x).exp()),
            terminal_cost: Arc::new(|_| 0.0),
            cost_bound: 1.0,
            discount: 1.0,
            actions: (0.0, 0.0),
            half_width: 6.0,
            diffusion_floor: 1e-8,
        }
    }

    pub fn sigma_slope(&self, x: f64) -> f64 {
        match &self.diffusion_slope {
            Some(f) => f(x),
            None => {
                let h = 1e-5 * x.abs().max(1.0);
                ((self.diffusion)(x + h) - (self.diffusion)(x - h)) / (2.0 * h)
            }
        }
    }

    /// `b̂(x, u) = b(x, u) + ½ σ'(x) σ(x)`.
    pub fn corrected_drift(&self, x: f64, u: f64) -> f64 {
        (self.drift)(x, u) + 0.5 * self.sigma_slope(x) * (self.diffusion)(x)
    }

    /// `a(x) = ½ σ(x)²`.
    pub fn diffusion_coefficient(&self, x: f64) -> f64 {
        let s = (self.diffusion)(x);
        0.5 * s * s
    }

    /// `nu` equally spaced actions, ascending.
    pub fn action_grid(&self, nu: usize) -> Vec<f64> {
        let (lo, hi) = self.actions;
        if nu <= 1 || lo == hi {
            return vec![lo];
        }
        (0..nu)
            .map(|k| if k + 1 == nu { hi } else { lo + (hi - lo) * k as f64 / (nu - 1) as f64 })
            .collect()
    }

    /// Checks the standing assumptions on a sampling grid of the box.
    pub fn validate(&self, nx: usize, nu: usize) -> Result<ModelDiagnostics> {
        if !(self.discount > 0.0 && self.discount.is_finite()) {
            return Err(Error::param("discount", "must be positive"));
        }
        if !(self.half_width > 0.0) {
            return Err(Error::param("half_width", "must be positive"));
        }
        if !(self.actions.0 <= self.actions.1) {
            return Err(Error::param("actions", "need lo ≤ hi"));
        }
        let nx = nx.max(3);
        let h = 2.0 * self.half_width / (nx - 1) as f64;
        let actions = self.action_grid(nu);
        let mut diag = ModelDiagnostics {
            cost_max: 0.0,
            cost_min: f64::INFINITY,
            cost_slope: 0.0,
            diffusion_min: f64::INFINITY,
        };
        for i in 0..nx {
            let x = -self.half_width + h * i as f64;
            let a = self.diffusion_coefficient(x);
            diag.diffusion_min = diag.diffusion_min.min(a);
            for &u in &actions {
                let c = (self.running_cost)(x, u);
                if !c.is_finite() || !(self.corrected_drift(x, u)).is_finite() {
                    return Err(Error::NonFinite { what: "model coefficients", index: i });
                }
                diag.cost_max = diag.cost_max.max(c);
                diag.cost_min = diag.cost_min.min(c);
                if i > 0 {
                    let prev = (self.running_cost)(x - h, u);
                    diag.cost_slope = diag.cost_slope.max((c - prev).abs() / h);
                }
            }
        }
        if diag.cost_min < 0.0 {
            return Err(Error::param("running_cost", format!("negative value {}", diag.cost_min)));
        }
        if diag.cost_max > self.cost_bound * (1.0 + 1e-12) {
            return Err(Error::param(
                "cost_bound",
                format!("running cost reaches {} above the bound {}", diag.cost_max, self.cost_bound),
            ));
        }
        if diag.diffusion_min < self.diffusion_floor {
            return Err(Error::param(
                "diffusion",
                format!("½σ² drops to {} below the floor {}", diag.diffusion_min, self.diffusion_floor),
            ));
        }
        Ok(diag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelDiagnostics {
    pub cost_max: f64,
    pub cost_min: f64,
    /// Largest sampled slope of the running cost in `x`.
    pub cost_slope: f64,
    pub diffusion_min: f64,
}

impl VectorField for ModelSpec {
    fn state_dim(&self) -> usize {
        1
    }

    fn noise_dim(&self) -> usize {
        1
    }

    fn drift(&self, x: &[f64], u: f64, out: &mut [f64]) {
        out[0] = (self.drift)(x[0], u);
    }

    fn sigma(&self, x: &[f64], out: &mut [f64]) {
        out[0] = (self.diffusion)(x[0]);
    }

    fn sigma_jacobian(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.sigma_slope(x[0]);
    }
}
