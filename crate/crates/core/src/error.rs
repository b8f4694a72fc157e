use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::Fingerprint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid identifier {value:?}: {reason}")]
    InvalidId { value: String, reason: &'static str },

    #[error("text is not in normalized form: {0:?}")]
    NotNormalized(String),

    #[error("sentence is empty after normalization")]
    EmptySentence,

    #[error("parse error at byte {offset}{}: {message}", record.as_ref().map(|r| format!(" (record {r})")).unwrap_or_default())]
    Parse {
        offset: u64,
        record: Option<String>,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Stream(#[from] io::Error),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("release {0} is already ingested")]
    AlreadyIngested(String),

    #[error("fingerprint collision on {fingerprint}: {existing:?} vs {incoming:?}")]
    Collision {
        fingerprint: Fingerprint,
        existing: String,
        incoming: String,
    },

    #[error("unsupported workspace format at {}: {found:?}", path.display())]
    Format { path: PathBuf, found: String },

    #[error("workspace {} is locked by another writer", .0.display())]
    Locked(PathBuf),

    #[error("registry: {0}")]
    Registry(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("corrupt workspace: {0}")]
    Corrupt(String),

    #[error("generator: {0}")]
    Generator(String),

    #[error("corpus too large for brute-force evaluation: {cells} cells (limit {limit})")]
    TooLarge { cells: u64, limit: u64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }
}
