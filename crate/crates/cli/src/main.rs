//! `wave-rvfl`: train, apply and benchmark RVFL-family classifiers from the
//! command line.
//!
//! Exit codes: 0 success, 1 partial results or degenerate statistics,
//! 2 usage or input errors, 3 numerical failures.

mod args;
mod benchmark;
mod failure;
mod perturb;
mod predict;
mod stats;
mod train;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "wave-rvfl", version, about = "RVFL classifiers with the wave loss")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model on a CSV dataset and save it as JSON.
    Train(train::TrainArgs),
    /// Label the rows of a CSV file with a saved model.
    Predict(predict::PredictArgs),
    /// Cross-validated grid search over datasets and variants, with rank statistics.
    Benchmark(benchmark::BenchmarkArgs),
    /// Write label-flipped or noise-perturbed copies of a dataset.
    Perturb(perturb::PerturbArgs),
    /// Average ranks, Friedman statistics and win/tie/loss counts for a result table.
    Stats(stats::StatsArgs),
}

/// Outcome of a subcommand that ran to completion.
pub enum Completion {
    Done,
    /// Finished, but some results are missing or statistics are degenerate.
    Partial(String),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train::run(a),
        Command::Predict(a) => predict::run(a),
        Command::Benchmark(a) => benchmark::run(a),
        Command::Perturb(a) => perturb::run(a),
        Command::Stats(a) => stats::run(a),
    };
    match result {
        Ok(Completion::Done) => ExitCode::SUCCESS,
        Ok(Completion::Partial(why)) => {
            log::warn!("{why}");
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
