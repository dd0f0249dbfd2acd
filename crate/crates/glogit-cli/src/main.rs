//! Batch CLI for Bayesian generalized logistic regression with the
//! Pólya-Gamma Gibbs sampler: data simulation, fitting, chain diagnostics
//! and the full simulation-study grid.

mod commands;
mod csvio;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{diagnose, fit, simulate, study};

#[derive(Parser)]
#[command(
    name = "glogit",
    version,
    about = "Bayesian generalized logistic regression via a Polya-Gamma Gibbs sampler",
    after_help = "Output directory resolution: --out-dir if given, else the \
GLOGIT_OUT_DIR environment variable, else the current directory.\n\
Exit codes: 0 success, 1 I/O or runtime failure, 2 usage error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate replicate datasets from the latent-variable model
    Simulate(simulate::SimulateArgs),
    /// Sample the posterior for a CSV dataset
    Fit(fit::FitArgs),
    /// Geweke/acf/pacf reports for a stored chain
    Diagnose(diagnose::DiagnoseArgs),
    /// Run the whole simulate-and-fit grid and aggregate it table-style
    Study(study::StudyArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Fit(args) => fit::run(args),
        Command::Diagnose(args) => diagnose::run(args),
        Command::Study(args) => study::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
