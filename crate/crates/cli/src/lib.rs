//! Command-line front end: tests on CSV data, Monte Carlo studies, p-value
//! combination and critical value tables.
//!
//! Reports are JSON by default. Exit codes: 0 on success, 2 for usage errors
//! (bad flags, unsupported level, infeasible split), 3 for data errors
//! (unreadable or malformed input, degenerate data), 1 for output failures.

pub mod args;
pub mod commands;
pub mod input;
pub mod settings;

use std::io::Write;

use thiserror::Error;

pub use args::{Cli, Command, OutFormat};
pub use commands::{execute, Results, RunReport};
pub use input::{load_matrix, LoadOptions};
pub use settings::Settings;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Data(_) => 3,
            Self::Output(_) => 1,
        }
    }
}

impl From<hdmt_core::Error> for CliError {
    fn from(e: hdmt_core::Error) -> Self {
        use hdmt_core::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::UnsupportedLevel { .. }
            | E::UntabulatedM { .. }
            | E::InfeasibleSplit { .. } => Self::Usage(e.to_string()),
            _ => Self::Data(e.to_string()),
        }
    }
}

/// Parses nothing; runs an already parsed command line and writes the
/// report to stdout or `--output`.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second initialization (e.g. in tests) keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let report = execute(&cli.command)?;
    let format = common.out.unwrap_or(match cli.command {
        Command::Tables(_) => OutFormat::Csv,
        _ => OutFormat::Json,
    });
    let bytes = match format {
        OutFormat::Json => report.to_json()?,
        OutFormat::Csv => report.to_csv()?,
    };
    match &common.output {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| CliError::Output(e.to_string())),
    }
}
