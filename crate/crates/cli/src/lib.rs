//! Command-line pipeline around the `ratingnet` library: synthetic data
//! generation, ingest checks, training, the width sweep, cohort scoring,
//! trend analysis, and external-score comparison.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

use clap::Parser;

use args::{Cli, Command};
use config::{Resolved, RunConfig};
use error::CliResult;

fn dispatch(cli: Cli) -> CliResult<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let resolved = Resolved::new(config, cli.seed, cli.out_dir)?;
    match &cli.command {
        Command::Generate(args) => commands::generate::run(&resolved, args),
        Command::IngestCheck => commands::ingest_check::run(&resolved),
        Command::Train(args) => commands::train::run(&resolved, args),
        Command::Sweep(args) => commands::sweep::run(&resolved, args),
        Command::Score(args) => commands::score::run(&resolved, args),
        Command::Trend(args) => commands::trend::run(&resolved, args),
        Command::CompareExternal(args) => commands::compare::run(&resolved, args),
    }
}

/// Parse arguments, run, and map failures to exit codes (0 success,
/// 1 usage/config, 2 data, 3 numeric).
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
