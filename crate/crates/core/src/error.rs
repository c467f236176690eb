use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate box: dimensions {0:?} must all exceed 1e-6 m")]
    DegenerateBox([f64; 3]),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("quantization parameter {0} outside [0, 51]")]
    QpOutOfRange(i32),

    #[error("malformed stream at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },

    #[error("no point of the cloud falls inside the projection footprint")]
    OutsideFootprint,

    #[error("curves do not overlap on an interval of positive length")]
    EmptyOverlap,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn malformed(offset: usize, msg: impl Into<String>) -> Self {
        Error::Malformed {
            offset,
            message: msg.into(),
        }
    }
}
