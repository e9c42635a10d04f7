use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: String },

    #[error("target not accessible: {0}")]
    NotAccessible(String),

    #[error("no channel exists: {0}")]
    NoChannel(String),

    #[error("degenerate fixed point: {0}")]
    DegenerateFixedPoint(String),

    #[error("memory required: P(0|1) = {p01} exceeds memoryless bound {threshold}")]
    MemoryRequired { p01: f64, threshold: f64 },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
