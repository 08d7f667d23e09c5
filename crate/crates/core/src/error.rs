//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by estimation, simulation and reporting routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input data violate a precondition (length, finiteness, ties, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Matrix/vector shapes do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An iterative routine exhausted its budget without meeting tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A linear system or covariance matrix is numerically singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// A test statistic cannot be computed on the given sample.
    #[error("not computable: {0}")]
    NotComputable(String),

    /// File parsing or I/O failure.
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
