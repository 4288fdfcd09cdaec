use thiserror::Error;

/// Errors raised by state validation and the measure evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entry count {got} does not match shape {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, got: usize },

    #[error("not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Kraus operators are not complete (residual {0:e})")]
    Incomplete(f64),

    #[error("input exceeds the dimension guard: {0}")]
    TooLarge(String),

    #[error("measure `{measure}` is not defined for this input: {reason}")]
    NotApplicable { measure: String, reason: String },

    #[error("support mismatch: relative entropy is infinite")]
    SupportMismatch,

    #[error("unknown name: {0}")]
    Unknown(String),
}

pub type Result<T> = std::result::Result<T, Error>;
