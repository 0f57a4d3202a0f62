//! Library half of the `qbench` binary: config files, CSV output, plots
//! and the validation suite.

pub mod amplitudes;
pub mod config;
pub mod output;
pub mod plot;
pub mod validate;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: config, flags, malformed files. Exit 2.
    #[error("{0}")]
    Usage(String),
    /// Failure while running a valid request. Exit 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_FAILURE,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
