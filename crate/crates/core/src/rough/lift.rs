//! Canonical lifts of sampled and smooth paths.

use crate::error::{ensure_finite, Error, Result};
use crate::grid::TimeGrid;
use crate::quadrature::GaussLegendre;

use super::path::{outer_add, RoughPath};

/// Lifts the piecewise-linear interpolant of `samples` (`(N+1) × dim`,
/// row-major) on `grid`. Each segment contributes `½ X_k ⊗ X_k`.
pub fn lift_piecewise_linear(
    samples: &[f64],
    dim: usize,
    grid: &TimeGrid,
    hoelder: f64,
) -> Result<RoughPath> {
    if dim == 0 {
        return Err(Error::param("dim", "must be positive"));
    }
    let n = grid.cells();
    if samples.len() != (n + 1) * dim {
        return Err(Error::Mismatch(format!(
            "{} samples for {} grid points of dimension {dim}",
            samples.len(),
            n + 1
        )));
    }
    ensure_finite("samples", samples)?;
    let mut increments = Vec::with_capacity(n * dim);
    let mut second = vec![0.0; n * dim * dim];
    for k in 0..n {
        let start = increments.len();
        for a in 0..dim {
            increments.push(samples[(k + 1) * dim + a] - samples[k * dim + a]);
        }
        let x = &increments[start..];
        let cell = &mut second[k * dim * dim..(k + 1) * dim * dim];
        let half: Vec<f64> = x.iter().map(|v| 0.5 * v).collect();
        outer_add(cell, &half, x);
    }
    RoughPath::from_cells(grid.clone(), dim, increments, second, hoelder)
}

/// Lifts a `C¹` path given by `path` and its exact derivative `derivative`.
///
/// The second level on each cell is `∫ (x(r) - x(t_k)) ⊗ x'(r) dr`. Its
/// symmetric part is set to `½ X_k ⊗ X_k` exactly and the antisymmetric part
/// (the area) comes from an `order`-point Gauss-Legendre rule. Both callbacks
/// write `dim` values.
pub fn lift_smooth_quadrature<P, D>(
    path: P,
    derivative: D,
    dim: usize,
    grid: &TimeGrid,
    order: usize,
    hoelder: f64,
) -> Result<RoughPath>
where
    P: Fn(f64, &mut [f64]),
    D: Fn(f64, &mut [f64]),
{
    if order < 2 {
        return Err(Error::param("quad_order", format!("{order} < 2")));
    }
    if dim == 0 {
        return Err(Error::param("dim", "must be positive"));
    }
    let rule = GaussLegendre::new(order);
    let n = grid.cells();
    let pts = grid.points();

    let mut left = vec![0.0; dim];
    let mut right = vec![0.0; dim];
    let mut x = vec![0.0; dim];
    let mut dx = vec![0.0; dim];
    let mut rel = vec![0.0; dim];
    let mut increments = Vec::with_capacity(n * dim);
    let mut second = vec![0.0; n * dim * dim];

    path(pts[0], &mut left);
    ensure_finite("path evaluation", &left)?;
    for k in 0..n {
        path(pts[k + 1], &mut right);
        ensure_finite("path evaluation", &right)?;
        let cell = &mut second[k * dim * dim..(k + 1) * dim * dim];
        for (r, w) in rule.on(pts[k], pts[k + 1]) {
            path(r, &mut x);
            derivative(r, &mut dx);
            ensure_finite("path evaluation", &x)?;
            ensure_finite("derivative evaluation", &dx)?;
            for a in 0..dim {
                rel[a] = w * (x[a] - left[a]);
            }
            outer_add(cell, &rel, &dx);
        }
        let inc = increments.len();
        for a in 0..dim {
            increments.push(right[a] - left[a]);
        }
        let xk = &increments[inc..];
        for a in 0..dim {
            for b in a..dim {
                let area = 0.5 * (cell[a * dim + b] - cell[b * dim + a]);
                let sym = 0.5 * xk[a] * xk[b];
                cell[a * dim + b] = sym + area;
                cell[b * dim + a] = sym - area;
            }
        }
        std::mem::swap(&mut left, &mut right);
    }
    RoughPath::from_cells(grid.clone(), dim, increments, second, hoelder)
}
