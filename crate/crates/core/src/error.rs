use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a function (e.g. a non-positive SINR target).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range for {what} (size {len})")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    /// A model invariant does not hold. The message names the invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// An operation was applied to an instance outside its special case.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration of {count} profiles exceeds the cap of {cap}")]
    SizeCap { count: u128, cap: u128 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e}, tolerance {tolerance:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status: 2 for solver failures, 3 for bad input, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Convergence { .. } => 2,
            Error::Io(_) | Error::Csv(_) => 1,
            _ => 3,
        }
    }
}
