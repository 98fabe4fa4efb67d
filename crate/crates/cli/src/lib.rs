//! Command-line front end of `maxscore-core`: dataset files, run
//! configuration and JSON/CSV reports.

pub mod args;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod hoeffding_cmd;
pub mod montecarlo;
pub mod output;
pub mod report;

use args::{Cli, Command};
use clap::Parser;
pub use error::{CliError, CliResult};

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure threads: {e}")))?;
    }
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Bootstrap(a) => commands::bootstrap(a),
        Command::Montecarlo(a) => montecarlo::montecarlo(a),
        Command::HoeffdingCheck(a) => hoeffding_cmd::hoeffding_check(a),
        Command::Oracle(a) => commands::oracle(a),
    }
}

/// Process entry point: parses the arguments, runs and exits with the
/// error's status on failure.
pub fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
