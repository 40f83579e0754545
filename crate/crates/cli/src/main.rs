//! `rsbekk`: summary statistics, model fitting, regime filtering,
//! simulation and premium decomposition from the command line.
//!
//! Exit codes: 0 success, 1 input error, 2 fit did not converge (the result
//! is still written).

mod commands;
mod doc;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "rsbekk", version, about = "Linear and regime-switching BEKK GARCH-in-mean models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summary statistics per column (moments, Jarque-Bera, Ljung-Box).
    Stats(StatsArgs),
    /// Fit a model by quasi-maximum likelihood and write the result as JSON.
    Fit(FitArgs),
    /// Recompute regime probabilities at fitted parameters.
    Filter(FilterArgs),
    /// Simulate a series from either model.
    Simulate(SimulateArgs),
    /// Market and hedge premium paths at fitted parameters.
    Premium(PremiumArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    Decimal,
    Percent,
}

#[derive(Args)]
struct InputArgs {
    /// Monthly CSV with a `date` column.
    input: PathBuf,
    /// Market excess-return column (default: first value column).
    #[arg(long)]
    market: Option<String>,
    /// Hedge excess-return column (default: second value column).
    #[arg(long)]
    hedge: Option<String>,
    /// Override the file's units pragma.
    #[arg(long, value_enum)]
    units: Option<UnitsArg>,
}

#[derive(Args)]
struct StatsArgs {
    /// Monthly CSV with a `date` column.
    input: PathBuf,
    #[arg(long, value_enum)]
    units: Option<UnitsArg>,
    /// Print JSON instead of a text table.
    #[arg(long)]
    json: bool,
    /// Also write the table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    regimes: u8,
    /// Pin the hedge prices of risk at zero.
    #[arg(long)]
    restricted: bool,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20_000)]
    max_iterations: usize,
    /// Output JSON file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Result JSON written by `fit --regimes 2`.
    result: PathBuf,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    regimes: u8,
    /// Parameters as JSON (a result document or a bare parameter block);
    /// built-in defaults when absent.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Number of months.
    #[arg(long = "t", default_value_t = 600)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PremiumArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Result JSON written by `fit`.
    result: PathBuf,
    /// Premium paths CSV (date, market, hedge, total).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report medians per annum (x12).
    #[arg(long)]
    annualize: bool,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let outcome = match cli.command {
        Command::Stats(a) => commands::stats(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Filter(a) => commands::filter(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Premium(a) => commands::premium(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
