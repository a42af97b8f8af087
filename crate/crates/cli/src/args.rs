//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use ratingnet::mlp::HeadKind;

#[derive(Debug, Parser)]
#[command(
    name = "ratingnet",
    version,
    about = "Credit-rating MLP pipeline: synthetic data, training, evaluation"
)]
pub struct Cli {
    /// Run-config file (TOML). Flags override config values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed; stage seeds derive from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory (created if absent).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic feature/label panel in ingest format.
    Generate(GenerateArgs),
    /// Load, join, and filter the input files; print dataset diagnostics.
    IngestCheck,
    /// Run the full pipeline: split, normalize, balance, train, evaluate.
    Train(TrainArgs),
    /// Train both heads across several hidden widths and tabulate metrics.
    Sweep(SweepArgs),
    /// Score a cohort feature file with a saved model.
    Score(ScoreArgs),
    /// Per-company trend slopes over a scored cohort.
    Trend(TrendArgs),
    /// Correlate model scores against an external risk score file.
    CompareExternal(CompareArgs),
}

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    /// Number of companies in the panel.
    #[arg(long)]
    pub companies: Option<usize>,

    /// Years per company.
    #[arg(long)]
    pub years: Option<usize>,

    /// Per-year probability of a one-notch rating change.
    #[arg(long)]
    pub transition_prob: Option<f64>,

    /// Probability that a rating change moves toward worse credit.
    #[arg(long)]
    pub downgrade_bias: Option<f64>,

    /// Companies that get missing cells punched in.
    #[arg(long)]
    pub incomplete: Option<usize>,

    /// Multiplier on the default per-feature noise std.
    #[arg(long)]
    pub noise_scale: Option<f64>,
}

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    /// Model head.
    #[arg(long, value_enum)]
    pub head: Option<HeadArg>,

    /// Hidden-layer width.
    #[arg(long)]
    pub width: Option<usize>,

    /// Training epochs (full-batch steps).
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    /// Hidden widths to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 25, 50, 100, 200])]
    pub widths: Vec<usize>,

    /// Training epochs per cell.
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, clap::Args)]
pub struct ScoreArgs {
    /// Model file; defaults to `<out_dir>/model.json`.
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Cohort feature file to score.
    #[arg(long)]
    pub features: PathBuf,

    /// Output file; defaults to `<out_dir>/scores.csv`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct TrendArgs {
    /// Scored cohort file (output of `score`).
    #[arg(long)]
    pub scores: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct CompareArgs {
    /// Scored cohort file (output of `score`).
    #[arg(long)]
    pub scores: PathBuf,

    /// External score file with columns company_id,score.
    #[arg(long)]
    pub external: PathBuf,

    /// The external score is higher-is-better (lower risk). Sets the
    /// expected correlation sign in the output.
    #[arg(long)]
    pub higher_is_better: bool,
}

/// Head selection on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum HeadArg {
    Classification,
    Regression,
}

impl From<HeadArg> for HeadKind {
    fn from(value: HeadArg) -> Self {
        match value {
            HeadArg::Classification => HeadKind::Classification,
            HeadArg::Regression => HeadKind::Regression,
        }
    }
}
