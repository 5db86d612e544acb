//! Error type shared by every module of the crate.

use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("grid index ordering violated: expected i < j, got i = {i}, j = {j}")]
    Ordering { i: usize, j: usize },

    #[error("alignment mismatch: {0}")]
    Mismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state left the guard box at step {step} (|y| = {magnitude:e})")]
    Divergence { step: usize, magnitude: f64 },

    #[error("{excluded} of {total} paths diverged, above the 0.1% exclusion limit")]
    TooManyDivergences { excluded: usize, total: usize },

    #[error("{solver} did not converge after {iterations} iterations (residual history: {history:?})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("circulant embedding is not positive semi-definite: eigenvalue {value:e} at index {index}")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("policy certification failed: Lipschitz constant {constant} exceeds limit {limit}")]
    Certification { constant: f64, limit: f64 },

    #[error("memory guard: {cells} table cells requested, limit is {limit}")]
    MemoryGuard { cells: usize, limit: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. }
                | Error::TooManyDivergences { .. }
                | Error::NotConverged { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::Certification { .. }
                | Error::MemoryGuard { .. }
        )
    }
}

pub(crate) fn ensure_finite(what: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}
