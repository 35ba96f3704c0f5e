//! Config-driven runner for the `heralded` library.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 config error, 3 an optimizer
//! did not converge (outputs are still written, flagged `converged = false`).

pub mod check;
pub mod config;
pub mod figures;
pub mod output;
pub mod scenario;

use std::fmt;

pub use scenario::{run_config_text, run_scenario, RunReport};

#[derive(Debug)]
pub enum CliError {
    Config { field: String, message: String },
    Runtime(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config { field: field.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Runtime(_) | Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config { field, message } => write!(f, "config error in {field}: {message}"),
            Self::Runtime(m) => write!(f, "runtime error: {m}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<heralded::Error> for CliError {
    fn from(e: heralded::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

pub const EXIT_NOT_CONVERGED: i32 = 3;
