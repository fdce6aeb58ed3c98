//! The `sumdim` command line: argument parsing, configs, run directories
//! and the seeded verification suite.

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod verify;

use std::ffi::OsString;

use clap::Parser;
use thiserror::Error;

use crate::args::{Cli, Command};

pub const EXIT_OK: u8 = 0;
/// A check or inequality failed; the run itself completed.
pub const EXIT_FINDING: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sumdim_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a completed subcommand found.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub findings: Vec<String>,
}

impl Outcome {
    pub fn clean() -> Self {
        Self::default()
    }

    pub fn finding_if(failed: bool, message: impl Into<String>) -> Self {
        let mut o = Self::default();
        o.check(failed, message);
        o
    }

    pub fn check(&mut self, failed: bool, message: impl Into<String>) {
        if failed {
            self.findings.push(message.into());
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("SUMDIM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `argv`, runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Gamma(a) => commands::gamma::run(a),
        Command::GammaSearch(a) => commands::search::run(a),
        Command::Boxdim(a) => commands::boxdim::run(a),
        Command::Inflation(a) => commands::inflation::run(a),
        Command::Fourier(a) => commands::fourier::run(a),
        Command::Bounds(a) => commands::bounds::run(a),
        Command::VerifyAll(a) => commands::verify_all::run(a),
    };
    match result {
        Ok(outcome) if outcome.findings.is_empty() => EXIT_OK,
        Ok(outcome) => {
            for f in &outcome.findings {
                eprintln!("finding: {f}");
            }
            EXIT_FINDING
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Core(sumdim_core::Error::Construction(_)) | CliError::Core(sumdim_core::Error::HypothesisViolated(_)) => {
                    EXIT_FINDING
                }
                _ => EXIT_USAGE,
            }
        }
    }
}
