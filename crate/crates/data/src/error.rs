use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = DataError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing raw file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("{}: expected {expected} columns, found {got}", path.display())]
    Schema {
        path: PathBuf,
        expected: usize,
        got: usize,
    },

    #[error("{}: header column {index} is {got:?}, expected {expected:?}", path.display())]
    Header {
        path: PathBuf,
        index: usize,
        expected: String,
        got: String,
    },

    #[error("{}: row {row}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        row: u64,
        message: String,
    },

    #[error("{file}: checksum mismatch (expected {expected}, found {actual})")]
    Checksum {
        file: String,
        expected: String,
        actual: String,
    },

    #[error("column {column}: {message}")]
    Encoding { column: String, message: String },

    #[error("empty group after filtering: {0}")]
    EmptyGroup(String),

    #[error("split sizes {train} + {test} exceed the {available} available rows")]
    SplitSize {
        train: usize,
        test: usize,
        available: usize,
    },

    #[error("unknown dataset {0:?} (expected adult, german, bank or crime)")]
    UnknownDataset(String),

    #[error("snapshot {}: {message}", path.display())]
    Snapshot { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] wfair_core::Error),
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
