use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the streaming engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("label {label} at row {index} is outside 1..={classes}")]
    LabelOutOfRange { index: usize, label: i64, classes: usize },

    #[error("invalid chunk: {0}")]
    InvalidChunk(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in monitored series at position {0}")]
    NonFiniteSeries(usize),

    #[error("{path}: row {row}, column {column}: cannot parse {cell:?} as a number")]
    CsvCell {
        path: PathBuf,
        row: usize,
        column: usize,
        cell: String,
    },

    #[error("{0}: file holds no data rows")]
    EmptyFile(PathBuf),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("training chunk {0} carries no labels")]
    Unlabeled(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
