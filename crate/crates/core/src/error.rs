use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data is malformed. `offset` is a byte offset for file input or
    /// an element index for in-memory sequences.
    #[error("data error at offset {offset}: {message}")]
    Data { offset: u64, message: String },

    /// A caller-side invariant was violated.
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn data(offset: u64, msg: impl Into<String>) -> Self {
        Error::Data {
            offset,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
