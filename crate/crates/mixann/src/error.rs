//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row}: label {value:?} is not 0 or 1")]
    Label { row: usize, value: String },

    #[error("bad CSV header: {0}")]
    BadHeader(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("class {label} cannot appear in every partition of a stratified split")]
    InsufficientClassSamples { label: u8 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("neighbor index is empty")]
    EmptyIndex,

    #[error("no point with label {0} in the index")]
    NoSuchLabel(u8),

    #[error("training data contains a single class")]
    SingleClassData,

    #[error("label vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("confusion matrix has no entries")]
    EmptyMatrix,

    #[error("mix ratio {0} is outside [0, 1]")]
    MixRatioOutOfRange(f64),

    #[error("need at least two minority samples, found {0}")]
    TooFewMinority(usize),

    #[error("empty batch")]
    EmptyBatch,

    #[error("empty neighborhood")]
    EmptyNeighborhood,

    #[error("replay buffer holds {len} records, need {requested}")]
    BufferTooSmall { len: usize, requested: usize },

    #[error("parameter shape mismatch: {left} vs {right} values")]
    ShapeMismatch { left: usize, right: usize },

    #[error("unsupported parameter file version {0}")]
    BadVersion(u32),

    #[error("corrupt parameter file: {0}")]
    BadParamsFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    ConfigJson {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
