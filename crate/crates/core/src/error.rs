use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid UTF-8 at byte {offset}")]
    Encoding { offset: usize },

    #[error("invalid language pair: {0}")]
    InvalidPair(String),

    #[error("segment {id}: {reason}")]
    InvalidSegment { id: String, reason: String },

    #[error("stream {index} has pair {found}, expected {expected}")]
    MixedPairs {
        index: usize,
        expected: String,
        found: String,
    },

    #[error("invalid split request: {0}")]
    InvalidSplit(String),

    #[error("segment {id} cannot be written as {format}: contains {what}")]
    Unrepresentable {
        id: String,
        format: &'static str,
        what: &'static str,
    },

    #[error("bitext files are misaligned: {path} ends at line {line}")]
    Misaligned { path: PathBuf, line: usize },

    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem rather than the data.
    pub fn is_io(&self) -> bool {
        matches!(self, CorpusError::Io { .. })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("{hypotheses} hypotheses but {references} references")]
    LengthMismatch {
        hypotheses: usize,
        references: usize,
    },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("reference segment {index} is empty")]
    EmptyReference { index: usize },

    #[error("invalid metric configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error)]
pub enum LeaderboardError {
    #[error("no records")]
    Empty,

    #[error("reference system {0:?} not found")]
    MissingReference(String),

    #[error("records span several directions: {0} and {1}")]
    MixedDirections(String, String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("checksum mismatch: expected {expected}, computed {actual}")]
    Checksum { expected: String, actual: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
