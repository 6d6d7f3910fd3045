use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the watermarking pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vocabulary: {0}")]
    Vocabulary(String),

    #[error("invalid key: {0}")]
    Key(String),

    #[error("invalid probability vector: {0}")]
    ProbVector(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("token id {token} is outside the vocabulary of size {vocab_size}")]
    TokenOutOfRange { token: u32, vocab_size: usize },

    #[error("empty input sequence")]
    EmptyInput,

    #[error("model contract violation: {0}")]
    Contract(String),

    #[error("periodogram: {0}")]
    Periodogram(String),

    #[error("insufficient probe data: {kept} of {total} pairs survive q_min = {q_min} (need at least {needed})")]
    InsufficientProbeData {
        total: usize,
        kept: usize,
        q_min: f64,
        needed: usize,
    },

    #[error("failed to parse {what}: {source}")]
    Parse {
        what: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
