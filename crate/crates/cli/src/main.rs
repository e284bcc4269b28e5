//! `predacc`: R²/L² prediction accuracy for complete and right-censored data.
//!
//! ```text
//! predacc evaluate --input data.csv --model cox --bootstrap 1000 --seed 1
//! predacc simulate --config cells.json --seed 1 --out cells.csv
//! predacc population --design aft-weibull --beta 1 --sigma 0.15 --model aft-lognormal
//! ```
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure, 4 config error.

mod commands;
mod error;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::io::DataKind;

#[derive(Parser, Debug)]
#[command(
    name = "predacc",
    version,
    about = "R² and L² prediction accuracy for complete and right-censored data"
)]
struct Cli {
    /// Run replicate loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model (or load predictions) and report R², L² and optional bootstrap intervals.
    Evaluate(EvaluateArgs),
    /// Run a simulation table from a JSON config.
    Simulate(SimulateArgs),
    /// Monte Carlo population ρ² and λ² for a simulation design.
    Population(PopulationArgs),
    /// Draw one sample from a simulation design and write it as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Ols,
    Cox,
    AftLognormal,
    AftWeibull,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PredictArg {
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    Km,
    Cox,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Input CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "censored")]
    data: DataKind,
    /// Defaults to cox for censored data and ols for complete data;
    /// `external` uses the `prediction` column or --predictions.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Single-column file of predictions aligned with the input rows.
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "mean")]
    predict: PredictArg,
    #[arg(long, value_enum, default_value = "km")]
    weights: WeightsArg,
    /// Bootstrap replicates; 0 disables the bootstrap.
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Random seed; drawn at random and recorded when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// CSV table path; stdout when omitted. A full-precision JSON document
    /// is written next to it with a `.json` extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignArg {
    CoxWeibull,
    AftWeibull,
}

#[derive(Args, Debug)]
pub struct PopulationArgs {
    #[arg(long, value_enum)]
    design: DesignArg,
    #[arg(long)]
    beta: f64,
    /// Weibull shape of the Cox design.
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    /// Scale of the AFT design.
    #[arg(long, default_value_t = 0.15)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "cox")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "mean")]
    predict: PredictArg,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 5000)]
    mc_n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON document path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CensoringArg {
    None,
    Independent,
    Dependent,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    design: DesignArg,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 0.15)]
    sigma: f64,
    #[arg(long)]
    n: usize,
    /// Censoring mechanism for the AFT design.
    #[arg(long, value_enum, default_value = "none")]
    censoring: CensoringArg,
    /// Target censoring rate.
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    /// Write `y,<covariates>` instead of `time,status,<covariates>`
    /// (uncensored designs only).
    #[arg(long)]
    complete: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let execution = if cli.sequential {
        predacc::exec::Execution::Sequential
    } else {
        predacc::exec::Execution::default()
    };
    let result = match &cli.command {
        Command::Evaluate(a) => commands::evaluate(a, execution),
        Command::Simulate(a) => commands::simulate(a, execution),
        Command::Population(a) => commands::population(a, execution),
        Command::Generate(a) => commands::generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
