//! `impdimer` binary: parses flags, runs one command and writes its report.

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use impdimer_cli::args::Cli;
use impdimer_cli::{default_format, run, CliError, EXIT_VERIFY_FAILED};

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let start = Instant::now();
    let report = run(cli)?;
    let body = report.render(cli.format.unwrap_or_else(|| default_format(cli)))?;
    match &cli.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{body}"),
    }
    if cli.verbose > 0 {
        eprintln!("elapsed: {:.2?}", start.elapsed());
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(EXIT_VERIFY_FAILED as u8)
        }
        Err(e) => {
            eprintln!("impdimer: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
