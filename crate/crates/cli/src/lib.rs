//! Batch front end for `ptlz`: configuration, the run pipeline, parameter
//! sweeps and the verification suite.

pub mod config;
pub mod run;
pub mod verify;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn numeric(e: impl std::fmt::Display) -> Self {
        Self::Numeric(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => EXIT_CONFIG,
            Self::Numeric(_) => EXIT_NUMERIC,
        }
    }
}
