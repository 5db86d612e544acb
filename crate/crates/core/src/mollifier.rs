//! The standard compactly supported bump `φ(x) ∝ exp(-1/(1-x²))` on `(-1, 1)`.

use std::sync::OnceLock;

use crate::quadrature::GaussLegendre;

/// Unnormalised bump.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

pub fn bump_derivative(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - x * x;
        bump(x) * (-2.0 * x / (q * q))
    }
}

/// `∫_{-1}^{1} exp(-1/(1-x²)) dx`.
pub fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let rule = GaussLegendre::new(16);
        let panels = 256;
        (0..panels)
            .map(|p| {
                let a = -1.0 + 2.0 * p as f64 / panels as f64;
                rule.integrate(a, a + 2.0 / panels as f64, bump)
            })
            .sum()
    })
}

/// Unit-mass kernel of half-width `eps`: `φ(x/ε) / ε`.
pub fn kernel(x: f64, eps: f64) -> f64 {
    bump(x / eps) / (bump_mass() * eps)
}

/// Symmetric composite-midpoint rule on `[-1, 1]` with weights normalised to
/// sum to one. Returns `(node, weight)` pairs.
pub fn symmetric_rule(points: usize) -> Vec<(f64, f64)> {
    let h = 2.0 / points as f64;
    let raw: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let x = -1.0 + h * (i as f64 + 0.5);
            (x, bump(x))
        })
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    raw.into_iter().map(|(x, w)| (x, w / total)).collect()
}
