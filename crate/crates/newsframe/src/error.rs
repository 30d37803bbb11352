use std::io;
use std::path::PathBuf;

use newsframe_core::{AnalyticsError, ArchiveError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    /// A record that does not parse or fails validation.
    #[error("{file}:{line}: {message}")]
    Record { file: String, line: usize, message: String },
    #[error("{file}: {message}")]
    File { file: String, message: String },
    #[error(transparent)]
    Archive(#[from] ArchiveError),
}

impl IngestError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        IngestError::Io { path: path.into(), source }
    }
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: not a snapshot ({reason})", path.display())]
    Format { path: PathBuf, reason: String },
    #[error(transparent)]
    Archive(#[from] ArchiveError),
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}:{line}: {message}")]
    Record { file: String, line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] AnalyticsError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible synthesis spec: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Archive(#[from] newsframe_core::ArchiveError),
}
