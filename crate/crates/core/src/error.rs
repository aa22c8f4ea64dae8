use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A file in an index directory failed to decode. The offset is the byte
    /// position at which decoding stopped making sense.
    #[error("format error in {file} at byte {offset}: {reason}")]
    Format {
        file: PathBuf,
        offset: u64,
        reason: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("query is empty")]
    EmptyQuery,

    #[error("query expands to {count} subqueries, more than the limit of {limit}")]
    TooManySubqueries { count: usize, limit: usize },

    #[error("index at {dir} was built without the {family} family")]
    MissingFamily { dir: PathBuf, family: &'static str },

    #[error("document {doc} exceeds 2^32 words")]
    DocumentTooLarge { doc: u32 },

    #[error("engines disagree on query {query:?}: {detail}")]
    EngineMismatch { query: String, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn format(file: impl Into<PathBuf>, offset: u64, reason: impl Into<String>) -> Self {
        Error::Format {
            file: file.into(),
            offset,
            reason: reason.into(),
        }
    }
}
