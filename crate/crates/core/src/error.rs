//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument fell outside its documented range.
    #[error("{name} = {value} out of range [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A matrix failed a density-matrix invariant (Hermiticity, trace, PSD).
    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    /// An argument combination is structurally invalid (e.g. unsupported basis
    /// combination, or an entropy bound built for different parameters).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A threshold or distance query has no solution in the search bracket.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A scalar root-finder failed to bracket a root.
    #[error("no root found: {0}")]
    NoRoot(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn range(name: &'static str, value: f64, min: f64, max: f64) -> Self {
        Error::OutOfRange {
            name,
            value,
            min,
            max,
        }
    }
}

/// Validate that `value` lies in `[min, max]`, propagating a range error otherwise.
pub(crate) fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<f64> {
    if value.is_finite() && value >= min && value <= max {
        Ok(value)
    } else {
        Err(Error::range(name, value, min, max))
    }
}
