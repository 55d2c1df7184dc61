//! `wavecast` command-line front end.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavecast::trainer::{Budget, DecompositionScope, MetricScale, Mode};

use crate::commands::Context;
use crate::error::{CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "wavecast", version, about = "Wavelet + bidirectional LSTM forecasting of oil and stock indices")]
pub struct Cli {
    /// Run manifest (`key = value` lines); flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Run seed. Drawn from the OS and reported on stderr when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Suppress progress output.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse raw price and case files into an aligned frame plus summary statistics.
    Ingest(IngestArgs),
    /// Descriptive statistics of every frame column.
    Stats(FrameArgs),
    /// ADF and PP unit-root tests on levels and first differences.
    Unitroot(UnitRootArgs),
    /// Stationary wavelet decomposition of every frame column.
    Decompose(DecomposeArgs),
    /// Train one network and save it with its preprocessing.
    Train(TrainArgs),
    /// Hyperparameter search over the configured space.
    Gridsearch(GridArgs),
    /// Forecast the next trading days with a saved model.
    Forecast(ForecastArgs),
    /// Compare RAW, WT_AD and WT_ADA inputs over several seeds.
    Compare(CompareArgs),
    /// Grid search, retrain the best configuration, then forecast.
    Run(GridArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_name = "CSV")]
    pub crude_oil: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub dji: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub sp500: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub nasdaq: Option<PathBuf>,
    /// Global confirmed-cases table.
    #[arg(long, value_name = "CSV")]
    pub cases: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    /// Aligned frame CSV (as written by `ingest`).
    #[arg(long, value_name = "CSV")]
    pub frame: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UnitRootArgs {
    #[command(flatten)]
    pub input: FrameArgs,
    /// Largest ADF lag considered by the information criterion.
    #[arg(long)]
    pub max_lags: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: FrameArgs,
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct PipelineArgs {
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub lookback: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    /// `per_partition` or `full_series`.
    #[arg(long)]
    pub scope: Option<DecompositionScope>,
    /// `scaled` or `price`.
    #[arg(long)]
    pub metric: Option<MetricScale>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: FrameArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Continue training a saved model for `epochs` more epochs.
    #[arg(long, value_name = "MODEL")]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub input: FrameArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// `full` or `random_<k>`.
    #[arg(long)]
    pub budget: Option<Budget>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub input: FrameArgs,
    /// Saved model (defaults to `<out>/model.json`).
    #[arg(long, value_name = "MODEL")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: FrameArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Comma-separated training seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Comma-separated target columns.
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = Context::new(&cli).and_then(|ctx| commands::dispatch(&ctx, &cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
