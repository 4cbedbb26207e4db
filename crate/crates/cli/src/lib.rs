//! Command line driver for the order-book tail analysis pipeline.
//!
//! `lobtail run --config <file>` processes tick files into a report tree and
//! `lobtail simstudy <name>` runs one of the seeded estimator studies. Exit
//! codes are 0 on success, 1 on a fatal error and 2 on a configuration or
//! usage error.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod sim;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{parse_day_range, RunConfig};
use crate::error::CliError;
use crate::pipeline::{run_pipeline, RunOptions};
use crate::sim::{run_simstudy, SimOptions, Study};

#[derive(Debug, Parser)]
#[command(name = "lobtail", version, about = "Heavy-tail analysis of limit order book volumes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the pipeline described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Inclusive day range `YYYY-MM-DD..YYYY-MM-DD`; either end may be empty.
        #[arg(long)]
        days: Option<String>,
        /// Worker threads, overrides the config.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run a synthetic estimator study.
    Simstudy {
        #[arg(value_enum)]
        study: Study,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long, default_value = "simstudy_out")]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, days, jobs } => {
            let cfg = RunConfig::load(&config)?;
            let (first_day, last_day) = match days {
                Some(d) => parse_day_range(&d)?,
                None => (None, None),
            };
            if jobs == Some(0) {
                return Err(CliError::Config("--jobs must be positive".into()));
            }
            let summary = run_pipeline(&cfg, &RunOptions { first_day, last_day, jobs })?;
            for e in &summary.fatal_errors {
                eprintln!("error: {e}");
            }
            eprintln!(
                "{} days, {} series, {} fits ({} failed)",
                summary.days_processed, summary.series_built, summary.fits_succeeded, summary.fits_failed
            );
            Ok(summary.exit_code())
        }
        Command::Simstudy { study, seed, replicates, out } => {
            let anchors = run_simstudy(study, &SimOptions { seed, replicates }, &out)?;
            for a in anchors {
                eprintln!("{} {} ({})", if a.passed { "ok  " } else { "miss" }, a.name, a.detail);
            }
            Ok(0)
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
