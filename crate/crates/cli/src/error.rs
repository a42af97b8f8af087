//! CLI error wrapping with stage names and process exit codes.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
//! failure (divergence).

use ratingnet::error::ErrorCategory;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: ratingnet::Error,
    },

    #[error("{stage}: {source}")]
    Io {
        stage: &'static str,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Stage { source, .. } => match source.category() {
                ErrorCategory::Config => 1,
                ErrorCategory::Data => 2,
                ErrorCategory::Numeric => 3,
            },
        }
    }
}

/// Attach a pipeline stage name to core and IO errors.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> Stage<T> for Result<T, ratingnet::Error> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}

impl<T> Stage<T> for Result<T, std::io::Error> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Io { stage, source })
    }
}
