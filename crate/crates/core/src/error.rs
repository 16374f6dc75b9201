use thiserror::Error;

/// Errors raised by the recovery algorithms and their supporting kernels.
///
/// Matrix positions are reported 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero entry at ({row}, {col})")]
    ZeroEntry { row: usize, col: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is numerically singular (pivot {pivot:e} at step {step})")]
    Singular { step: usize, pivot: f64 },

    #[error("singular value iteration did not converge")]
    NoConvergence,

    #[error("points are not separated: x[{row}] - y[{col}] = 0")]
    SeparationViolated { row: usize, col: usize },

    #[error("projector vector {name} has entry sum {sum}, expected 1")]
    SpecInvalid { name: &'static str, sum: f64 },

    #[error("matrix size {n} exceeds the supported maximum {max}")]
    SizeTooLarge { n: usize, max: usize },

    #[error("matrix size {n} is below the required minimum {min}")]
    SizeTooSmall { n: usize, min: usize },

    #[error("power-law fit needs at least two distinct sizes with positive times")]
    DegenerateFit,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
