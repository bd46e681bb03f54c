//! Library side of the `iqls` command-line tool.
//!
//! Every subcommand is a plain function that returns its artifacts in
//! memory; `main` only parses flags and writes files. Tests and the
//! acceptance suite call the same functions.

// NaN must fail these range checks, so `!(a < b)` is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod data;
pub mod manifest;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Args(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Data { path: PathBuf, reason: String },

    #[error(transparent)]
    Core(#[from] iqls::Error),
}

impl CliError {
    /// Process exit status: 2 arguments, 3 I/O, 4 solver budget, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Args(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Data { .. } => 1,
            CliError::Core(e) => match e.root() {
                iqls::Error::InvalidArgument(_) => 2,
                iqls::Error::BudgetExceeded { .. } => 4,
                _ => 1,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
