//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure category, used by callers that map errors to process
/// exit codes (1 = config/usage, 2 = data, 3 = numeric).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown grade '{0}'")]
    UnknownGrade(String),

    #[error("invalid rating scale: {0}")]
    InvalidScale(String),

    #[error("no labels to build a class map from")]
    EmptyLabels,

    #[error("{path}: header is missing required column(s): {missing}", missing = .missing.join(", "))]
    MissingColumns { path: String, missing: Vec<String> },

    #[error("{path}: row {row}: {message}")]
    MalformedRow {
        path: String,
        row: u64,
        message: String,
    },

    #[error("duplicate label for ({company_id}, {fiscal_year})")]
    DuplicateLabel {
        company_id: String,
        fiscal_year: i32,
    },

    #[error("duplicate record for ({company_id}, {fiscal_year})")]
    DuplicateRecord {
        company_id: String,
        fiscal_year: i32,
    },

    #[error("record ({company_id}, {fiscal_year}) has missing values")]
    IncompleteRecord {
        company_id: String,
        fiscal_year: i32,
    },

    #[error("record ({company_id}, {fiscal_year}) has no label")]
    UnlabeledRecord {
        company_id: String,
        fiscal_year: i32,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("class index {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },

    #[error("class {class} has {count} sample(s); oversampling needs at least 2")]
    ClassTooSmall { class: usize, count: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error(
        "training diverged at epoch {epoch}; last finite loss {last_loss} at epoch {last_epoch}"
    )]
    Diverged {
        epoch: usize,
        last_epoch: usize,
        last_loss: f64,
    },

    #[error("model file {path}: {message}")]
    ModelFile { path: String, message: String },

    #[error("model file {path}: checksum mismatch (file corrupted or edited)")]
    ChecksumMismatch { path: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidScale(_) | Error::InvalidConfig(_) => ErrorCategory::Config,
            Error::NonFinite(_) | Error::Diverged { .. } => ErrorCategory::Numeric,
            _ => ErrorCategory::Data,
        }
    }
}
