use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::provider::ProviderError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid concept label {label:?}: {reason}")]
    InvalidLabel { label: String, reason: &'static str },

    #[error("relation ({a}, {b}) references {missing}, which is not in the batch")]
    DanglingRelation { a: String, b: String, missing: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed snapshot at byte {offset}: {message}")]
    SnapshotParse { offset: usize, message: String },

    #[error("unsupported snapshot version {found} (expected {expected})")]
    SnapshotVersion { found: u64, expected: u64 },

    #[error("inconsistent snapshot: {0}")]
    SnapshotInvalid(String),

    #[error("cannot embed: {0}")]
    Embedding(String),

    #[error("dataset section [{section}]: {message}")]
    Dataset { section: String, message: String },

    #[error("grading: {0}")]
    Grading(String),

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn dataset(section: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Dataset { section: section.into(), message: message.into() }
    }
}
