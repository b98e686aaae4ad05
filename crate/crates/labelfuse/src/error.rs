//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by parsing, validation, training and the command runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A malformed line in a dataset or prediction file (1-based line number).
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A document violates a structural invariant (unsorted terms, bad label index, ...).
    #[error("invalid document: {0}")]
    InvalidDocument(String),

    /// Shapes of two inputs disagree (model vs dataset, truth vs predictions, ...).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A configuration value is missing, unparseable or out of range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A hyperparameter violates its precondition (alpha <= 0, k > n, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Data is structurally fine but unusable for the requested operation.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A persisted model container is unreadable or has the wrong version.
    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 for configuration errors,
    /// 3 for data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::InvalidParameter(_) => 2,
            _ => 3,
        }
    }
}
