//! Command-line front end. [`run`] maps an argument vector to an exit code
//! and the bytes for stdout and stderr, so the whole CLI is testable in
//! process.

mod args;
mod commands;
mod spec;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::{Cli, Command, Format};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "CONTACT_BENCH_SEED";

/// Exit code, stdout and stderr of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or specs: exit 2.
    Usage(String),
    /// The run itself failed: exit 1.
    Runtime(String),
}

impl From<contact_bench::Error> for CliError {
    fn from(e: contact_bench::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Runs the CLI, reading the seed fallback from the process environment.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env_seed(argv, std::env::var(SEED_ENV).ok())
}

/// Runs the CLI with an explicit value standing in for `$CONTACT_BENCH_SEED`.
pub fn run_with_env_seed<I, T>(argv: I, env_seed: Option<String>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match commands::execute(cli, env_seed) {
        Ok(out) => Outcome {
            code: 0,
            stdout: out.stdout,
            stderr: out.stderr,
        },
        Err(CliError::Usage(m)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {m}\n\nFor more information, try '--help'.\n"),
        },
        Err(CliError::Runtime(m)) => Outcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {m}\n"),
        },
    }
}
