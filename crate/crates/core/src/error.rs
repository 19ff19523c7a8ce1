//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-binary treatment at row {row}")]
    NonBinaryTreatment { row: usize },

    #[error("non-finite value in column {column} at row {row}")]
    NonFinite { column: String, row: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("missing column {0}")]
    MissingColumn(String),

    #[error("csv parse error at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("perfect separation detected in logistic fit (coefficients diverge with ridge = 0)")]
    Separation,

    #[error("no rows with treatment arm {arm}")]
    EmptyArm { arm: u8 },

    #[error("fold {fold} is too small to fit nuisances: {reason}")]
    FoldTooSmall { fold: usize, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
