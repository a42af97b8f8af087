//! Subcommand implementations.

pub mod compare;
pub mod generate;
pub mod ingest_check;
pub mod pipeline;
pub mod score;
pub mod sweep;
pub mod train;
pub mod trend;

use std::path::Path;

use crate::error::{CliResult, Stage};

/// Write a delimited table with a header row; cells are pre-formatted.
pub(crate) fn write_table(
    path: &Path,
    stage: &'static str,
    header: &[&str],
    rows: &[Vec<String>],
) -> CliResult<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).stage(stage)
}

/// Write pretty JSON with a trailing newline.
pub(crate) fn write_json<T: serde::Serialize>(
    path: &Path,
    stage: &'static str,
    value: &T,
) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(ratingnet::Error::from)
        .stage(stage)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).stage(stage)
}
