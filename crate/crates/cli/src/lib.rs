//! Library surface of the `aniflow` CLI: config schema, file formats, and
//! the command implementations (kept here so integration tests can drive
//! them in-process).

pub mod commands;
pub mod config;
pub mod io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Solver(_) => "solver",
        }
    }

    /// Documented exit codes: 1 config, 2 I/O, 3 solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<aniflow_core::Error> for CliError {
    fn from(e: aniflow_core::Error) -> Self {
        CliError::Solver(format!("{e}"))
    }
}
