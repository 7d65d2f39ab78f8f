//! Command-line front end for `quasiweb`: configuration, subcommands, and
//! plain-text output.
//!
//! Exit codes: 0 success, 1 numeric failure or failed check, 2 configuration
//! or usage error.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<quasiweb::Error> for CliError {
    fn from(e: quasiweb::Error) -> Self {
        use quasiweb::Error::*;
        match e {
            InvalidParams(_) | InvalidGrid(_) | Divisibility { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}
