use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric: max asymmetry {max_asymmetry:e} exceeds {limit:e}")]
    NotSymmetric { max_asymmetry: f64, limit: f64 },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix is not positive semidefinite: lambda_min = {lambda_min:e} < -{tol:e}")]
    NotPsd { lambda_min: f64, tol: f64 },

    #[error("singular pivot at index {index}: diagonal {diagonal:e} with row norm {row_norm:e}")]
    SingularPivot {
        index: usize,
        diagonal: f64,
        row_norm: f64,
    },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("reconstruction error {error:e} exceeds {limit:e}")]
    Reconstruction { error: f64, limit: f64 },

    #[error("zero vector has no l1 projection onto the unit sphere")]
    ZeroVector,

    #[error("n = {n} exceeds the cap of {cap} for {what}")]
    TooLarge { what: &'static str, n: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code: 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularPivot { .. } | Error::NotConverged { .. } | Error::Reconstruction { .. } => 3,
            _ => 2,
        }
    }
}
