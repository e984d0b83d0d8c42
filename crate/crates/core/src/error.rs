use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the morphology, ordering, transport and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("extrema of empty set undefined")]
    EmptySet,

    #[error("dimension mismatch: expected {expected} components, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite component {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("value outside order support: {0:?}")]
    OutsideSupport(Vec<f64>),

    #[error("marginal order is partial; a total order is required here")]
    NotTotal,

    #[error("empty structuring window at pixel (row {row}, col {col})")]
    EmptyWindow { row: usize, col: usize },

    #[error("invalid structuring element: {0}")]
    InvalidStructuringElement(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("shape mismatch: {left:?} vs {right:?} (width, height, channels)")]
    ShapeMismatch {
        left: (usize, usize, usize),
        right: (usize, usize, usize),
    },

    #[error("transport problem is unbalanced: supply {supply} vs demand {demand}")]
    Unbalanced { supply: u64, demand: u64 },

    #[error("transport optimality certificate failed: {0}")]
    Certificate(String),

    #[error("unsupported image format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("png decode error: {0}")]
    PngDecode(#[from] png::DecodingError),

    #[error("png encode error: {0}")]
    PngEncode(#[from] png::EncodingError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
