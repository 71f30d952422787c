use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A named parameter constraint (e.g. `s > d/2`) was violated.
    #[error("constraint `{constraint}` violated: {detail}")]
    Constraint { constraint: &'static str, detail: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("dilation matrix is not expanding: eigenvalue modulus {modulus} <= 1")]
    NotExpanding { modulus: f64 },

    #[error("dilation matrix is not isotropic: eigenvalue moduli {moduli:?}")]
    NotIsotropic { moduli: Vec<f64> },

    #[error("instance too large: {resource} needs {count} entries (limit {limit}); {suggestion}")]
    InstanceTooLarge {
        resource: &'static str,
        count: u128,
        limit: u128,
        suggestion: String,
    },

    #[error("non-finite sample value {value} at index {index:?}")]
    Data { index: Vec<i64>, value: f64 },

    #[error("series does not converge: {0}")]
    Divergent(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn constraint(constraint: &'static str, detail: impl Into<String>) -> Self {
        Error::Constraint {
            constraint,
            detail: detail.into(),
        }
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
