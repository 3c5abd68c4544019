use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unsupported image format: {path}")]
    UnsupportedFormat { path: PathBuf },
    #[error("corrupt image data in {path}: {detail}")]
    CorruptData { path: PathBuf, detail: String },
    #[error("cannot write {path}: {source}")]
    WriteFailed {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("expected {expected} channels, image has {actual}")]
    ChannelMismatch { expected: usize, actual: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("image {width}x{height} too small: {detail}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        detail: String,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("plane of {pixels} pixels exceeds the {limit}-pixel dense-solver cap")]
    PlaneTooLarge { pixels: usize, limit: usize },
    #[error("internal invariant breached: {0}")]
    InvariantBreach(String),
    #[error("no loadable images in {path}")]
    EmptyInputDir { path: PathBuf },
}

pub type Result<T> = std::result::Result<T, Error>;
