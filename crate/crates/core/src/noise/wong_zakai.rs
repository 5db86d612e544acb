//! Piecewise-linear interpolation of a Brownian sample.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::rough::{lift_piecewise_linear, RoughPath};

use super::brownian::BrownianSample;

/// Values of the linear interpolant of `coarse` at the output grid points.
/// Every coarse point must also be an output point; there the value is copied.
pub fn interpolate_linear(coarse: &BrownianSample, output: &TimeGrid) -> Result<Vec<f64>> {
    let d = coarse.dim();
    let c = coarse.grid().points();
    let tol = 1e-12 * (1.0 + c[c.len() - 1].abs());
    if (output.start() - c[0]).abs() > tol || (output.end() - c[c.len() - 1]).abs() > tol {
        return Err(Error::Mismatch("output grid must span the coarse grid".into()));
    }
    let mut values = Vec::with_capacity(output.points().len() * d);
    let mut j = 0;
    let mut hits = 0;
    for &t in output.points() {
        while j + 1 < c.len() - 1 && t > c[j + 1] + tol {
            j += 1;
        }
        if (t - c[j]).abs() <= tol {
            values.extend_from_slice(coarse.value(j));
            hits += 1;
        } else if (t - c[j + 1]).abs() <= tol {
            values.extend_from_slice(coarse.value(j + 1));
            hits += 1;
        } else {
            let w = (t - c[j]) / (c[j + 1] - c[j]);
            let (a, b) = (coarse.value(j), coarse.value(j + 1));
            values.extend((0..d).map(|i| a[i] + w * (b[i] - a[i])));
        }
    }
    if hits != c.len() {
        return Err(Error::Mismatch(format!(
            "only {hits} of {} coarse points lie on the output grid",
            c.len()
        )));
    }
    Ok(values)
}

pub fn wong_zakai_lift(coarse: &BrownianSample, output: &TimeGrid, hoelder: f64) -> Result<RoughPath> {
    let values = interpolate_linear(coarse, output)?;
    lift_piecewise_linear(&values, coarse.dim(), output, hoelder)
}
