//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation that needs at least one hidden neuron was called on an
    /// empty network.
    #[error("empty network: {0}")]
    EmptyNetwork(&'static str),

    /// A matrix that must be invertible was singular or numerically
    /// indistinguishable from singular.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// The recursive update lost positive definiteness and cannot continue.
    #[error("rls breakdown: {0}")]
    Breakdown(String),

    /// A record in an input file could not be parsed. Row and column are
    /// 1-based and refer to the data as read, header included.
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
