use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("({x}, {y}) is outside the {width}x{height} image")]
    OutOfBounds {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },

    #[error("no finger found: {0}")]
    NoFinger(String),

    #[error("no features extracted")]
    NoFeatures,

    #[error("bad magic: expected \"FBX1\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported template version {found} (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },

    #[error("template length mismatch: expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("template label is not valid UTF-8")]
    LabelEncoding,

    #[error("label is {0} bytes, limit is 255")]
    LabelTooLong(usize),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("image decode error for {path}: {message}")]
    ImageDecode { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
