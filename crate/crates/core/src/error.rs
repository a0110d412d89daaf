//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed edge-list or feature input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Shape mismatch between two values that must agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input exceeds a hard size limit of a brute-force routine.
    #[error("capacity exceeded: {what} has size {actual}, limit {limit}")]
    Capacity {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    /// A label does not fit the model's embedding table.
    #[error("label {label} out of range for embedding table of size {table_size}")]
    LabelOutOfRange { label: u64, table_size: usize },

    /// A non-finite value surfaced where a finite one is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Training diverged.
    #[error("training diverged at epoch {epoch}: {msg}")]
    Training { epoch: usize, msg: String },

    /// Checkpoint bytes do not describe a model.
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
