use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by construction and simulation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A dimension argument is out of range (e.g. a Fock cutoff below 2).
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A specification value violates its invariant.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A tensor-factor slot or mode index is out of range.
    #[error("slot out of range: {0}")]
    SlotOutOfRange(String),

    /// A construction would spill excitations past a Fock cutoff.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// A scalar argument lies outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A run configuration is inconsistent with the system it drives.
    #[error("configuration error: {0}")]
    Config(String),

    /// A state invariant (Hermiticity, trace, positivity, norm) failed.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Time evolution aborted; carries the time of the violation.
    #[error("integration failure at t = {time}: {message}")]
    IntegrationFailure { time: f64, message: String },
}
