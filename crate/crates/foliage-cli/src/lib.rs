//! Command-line front end: fixtures, operations and exports, plus the
//! acceptance-criteria runner behind `foliage repro`.

pub mod commands;
pub mod config;
pub mod criteria;
pub mod fixtures;
pub mod output;

use clap::error::ErrorKind;
use clap::Parser;

pub use config::{Cli, RunConfig};

/// Exit code of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code when a checked invariant or acceptance criterion fails.
pub const EXIT_VIOLATION: i32 = 2;
/// Exit code for invalid input or configuration.
pub const EXIT_INVALID: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("invariant violated: {0}")]
    Violation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => EXIT_VIOLATION,
            CliError::Invalid(_) | CliError::Io(_) => EXIT_INVALID,
        }
    }
}

/// Parses argv (program name first), runs the subcommand and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    match run_inner(argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("foliage: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(argv: Vec<String>) -> Result<i32, CliError> {
    let (argv, tols) = config::take_tolerances(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
            let _ = e.print();
            return Ok(code);
        }
    };
    let cfg = RunConfig::resolve(cli, tols)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start {} worker threads: {e}", cfg.jobs)))?;
    pool.install(|| commands::dispatch(&cfg))
}
