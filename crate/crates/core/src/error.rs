use std::fmt;

use thiserror::Error;

/// A location inside a text input, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid segment [{start}, {end}]: {reason}")]
    InvalidSegment {
        start: u32,
        end: u32,
        reason: &'static str,
    },

    #[error("invalid annotation for video `{video_id}`: {reason}")]
    InvalidAnnotation { video_id: String, reason: String },

    #[error("IoU threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),

    #[error("ground-truth segment list is empty")]
    EmptyGroundTruth,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("video `{video_id}`: {source}")]
    Video {
        video_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("frame has no detected keypoints")]
    NoDetectedKeypoints,

    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { loss: f64, epoch: usize, batch: usize },

    #[error("{position}: {message}")]
    Parse { position: Position, message: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position: Position { line, column },
            message: message.into(),
        }
    }

    pub(crate) fn in_video(self, video_id: &str) -> Self {
        Error::Video {
            video_id: video_id.to_owned(),
            source: Box::new(self),
        }
    }

    pub(crate) fn in_file(self, path: impl AsRef<std::path::Path>) -> Self {
        Error::File {
            path: path.as_ref().display().to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Video { source, .. } | Error::File { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
