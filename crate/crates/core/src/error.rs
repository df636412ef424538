//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the solvers and builders in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Bessel order above the supported series/recurrence ceiling.
    #[error("unsupported Bessel order {order} (maximum {max})")]
    UnsupportedOrder { order: u32, max: u32 },

    /// Argument outside the mathematical domain of a special function.
    #[error("domain error: {0}")]
    DomainError(String),

    /// A sparse or dense factorization broke down.
    #[error("factorization failure: {0}")]
    FactorizationFailure(String),

    /// Coefficient contrast outside the regime the solver is reliable in.
    #[error("regime error: {0}")]
    RegimeError(String),

    /// The requested contrast is degenerate (no transmission eigenvalues).
    #[error("degenerate contrast: {0}")]
    DegenerateContrast(String),

    /// A root-finding target lies outside the achievable range of the bracket.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A 2x2 transmission-matching system was singular even after perturbation.
    #[error("numerical resonance at k = {k}")]
    NumericalResonance { k: f64 },

    /// Monotonicity pre-check for an inversion bracket failed.
    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),

    /// I/O error carried through the CLI layer.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
