mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Failure classes, one per exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad input or arguments (status 2).
    Config(String),
    /// The numerics failed (status 3).
    Numeric(String),
    /// A validation report failed under `--strict` (status 4).
    Validation(String),
}

impl CliError {
    fn status(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl From<qgnls::Error> for CliError {
    fn from(e: qgnls::Error) -> Self {
        if e.is_config_error() {
            CliError::Config(e.to_string())
        } else if let qgnls::Error::Validation(_) = e {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("qgnls: cannot start the worker pool: {e}");
            return ExitCode::from(3);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qgnls: {e}");
            ExitCode::from(e.status())
        }
    }
}
