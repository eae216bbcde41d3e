use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed structure: {0}")]
    Malformed(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("non-positive weight: {0}")]
    NonPositiveWeight(String),

    #[error("structure failed validation: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The interior block of a trace computation is numerically singular.
    #[error("pole of the trace map: interior block reciprocal condition {rcond:e}")]
    Pole { rcond: f64 },

    #[error("dense problem of size {size} exceeds the configured ceiling {ceiling}")]
    CeilingExceeded { size: usize, ceiling: usize },

    #[error("matrix is not in the Siegel upper half-space")]
    NotInSiegel,

    #[error("target {0} lies outside the backward-invariant interval [-5/2, 0]")]
    OutsideInvariantInterval(f64),

    #[error("coefficient size exceeded the bit limit of {0}")]
    BitLimit(u64),

    #[error("exact arithmetic requested but {0} has no exact rational value")]
    NotExact(String),

    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
