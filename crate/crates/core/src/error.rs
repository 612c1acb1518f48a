use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the codec pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("unsupported channel count: {0} (pass --mixdown to average stereo)")]
    UnsupportedChannels(u16),

    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("corrupt audio header: {0}")]
    CorruptHeader(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-contiguous frames: expected index {expected}, found {found}")]
    NonContiguousFrames { expected: usize, found: usize },

    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    #[error("unsupported method tag {0}")]
    UnsupportedMethod(u8),

    #[error("container version mismatch: file has {found}, expected {expected}")]
    VersionMismatch { found: u8, expected: u8 },

    #[error("corrupt container: {0}")]
    CorruptContainer(String),

    #[error("truncated payload in frame {frame}")]
    Truncated { frame: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
