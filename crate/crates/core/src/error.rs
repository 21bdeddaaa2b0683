use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} = {requested}, limit {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    Index { index: usize, num_qubits: usize },

    #[error("invalid gate arity: {0}")]
    Arity(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate spectrum: e_min == e_max == {0}")]
    DegenerateSpectrum(f64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Stable machine-readable tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Capacity { .. } => "capacity",
            Error::Index { .. } => "index",
            Error::Arity(_) => "arity",
            Error::Dimension { .. } => "dimension",
            Error::Argument(_) => "argument",
            Error::DegenerateSpectrum(_) => "degenerate_spectrum",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
