use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed image: {0}")]
    MalformedImage(String),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("failed to encode image: {0}")]
    EncodeFailure(String),
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },
    #[error("buffer of length {got} does not match {width}x{height}")]
    BufferSize {
        width: usize,
        height: usize,
        got: usize,
    },
    #[error("channel value {value} at pixel {index} is outside [0, 1]")]
    OutOfRangeChannel { index: usize, value: f64 },
    #[error("clustering needs at least 2 points, got {0}")]
    DegenerateInput(usize),
    #[error("brute-force clustering is limited to {max} points, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("invalid medoid init ({0}, {1}) for {2} points")]
    InvalidInit(usize, usize, usize),
    #[error("label length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("expected {expected} {what} pixels, got {got}")]
    WrongCount {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            left_width: left.0,
            left_height: left.1,
            right_width: right.0,
            right_height: right.1,
        }
    }
}
