use std::process::ExitCode;

use thiserror::Error;

/// Failure classes, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Runtime failure: solver, I/O, malformed input file.
    #[error("{0}")]
    Runtime(String),
    /// Invalid configuration or arguments.
    #[error("{0}")]
    Config(String),
    /// The audit found lemma violations.
    #[error("{0} lemma violation(s) found")]
    Violations(u64),
    /// An `--expect-*` assertion failed.
    #[error("{0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Violations(_) => 3,
            CliError::Assertion(_) => 4,
        })
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
