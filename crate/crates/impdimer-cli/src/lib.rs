//! Command-line front end for the impdimer library: counts, distributions, samplers,
//! asymptotic sweeps, graph export and the acceptance suite.
//!
//! Every command returns a [`report::Report`] carrying its provenance; rendering and
//! output placement are left to the caller, so identical inputs give identical bytes.

pub mod args;
pub mod commands;
pub mod report;
pub mod verify;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command, Format};
use report::Report;

/// Errors of the command-line layer.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent flags.
    #[error("usage: {0}")]
    Usage(String),
    /// The library rejected the configuration.
    #[error("invalid configuration: {0}")]
    Invalid(#[from] impdimer::Error),
    /// Output could not be produced or written.
    #[error("output: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code: every error is a usage error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Exit code of a verification failure.
pub const EXIT_VERIFY_FAILED: i32 = 1;

/// Runs the parsed command.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Count(a) => commands::count(a),
        Command::Dist(a) => commands::dist(a),
        Command::Sample(a) => commands::sample(a),
        Command::Asym(a) => commands::asym(a),
        Command::Verify(a) => Ok(verify::verify(a.suite, &a.only, cli.verbose > 0)),
        Command::Export(a) => commands::export(a),
    }
}

/// Default format of a command: DOT for export, text otherwise.
pub fn default_format(cli: &Cli) -> Format {
    match cli.command {
        Command::Export(_) => Format::Dot,
        _ => Format::Text,
    }
}

/// Parses, runs and renders one invocation given without the program name.
pub fn run_line(argv: &[&str]) -> Result<String, CliError> {
    let cli = Cli::try_parse_from(std::iter::once("impdimer").chain(argv.iter().copied()))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let report = run(&cli)?;
    report.render(cli.format.unwrap_or_else(|| default_format(&cli)))
}
