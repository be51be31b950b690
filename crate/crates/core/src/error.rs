use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// A structural precondition on Householder/WY data was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An internal invariant failed; this indicates a bug rather than bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
