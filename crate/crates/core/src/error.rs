use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid channel: row {row}: {reason}")]
    InvalidChannel { row: usize, reason: String },

    #[error("invalid subset mask: {0}")]
    InvalidMask(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("search space too large: {count} subsets exceed the limit of {limit}")]
    SearchTooLarge { count: u128, limit: u128 },

    #[error(
        "Blahut-Arimoto did not converge after {iterations} iterations \
         (lower bound {lower} bits, upper bound {upper} bits)"
    )]
    CapacityNotConverged {
        lower: f64,
        upper: f64,
        iterations: usize,
    },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("could not construct LDPC code after {attempts} attempts: {reason}")]
    LdpcConstruction { attempts: usize, reason: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
