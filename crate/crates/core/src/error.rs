//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An operation required a symmetric matrix.
    #[error("matrix not symmetric: {0}")]
    NotSymmetric(String),

    /// A matrix dimension exceeded the configured cap.
    #[error("dimension {dim} exceeds cap {cap}")]
    DimCapExceeded { dim: usize, cap: usize },

    /// A parameter was outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No exact polar oracle is implemented for this pair of atomic sets.
    #[error("no tractable exact oracle for pair {0}")]
    IntractablePair(String),

    /// A sampling routine could not produce a single feasible draw.
    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    /// An iterative solver failed to reach its target accuracy.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
