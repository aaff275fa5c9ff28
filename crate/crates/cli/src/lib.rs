//! Command-line surface of the `sectorheat` engine: argument and config
//! handling, the commands, the check suites shared with the acceptance run,
//! and deterministic CSV/JSON output.

pub mod args;
pub mod commands;
pub mod report;
pub mod suites;

use std::fmt;

/// Failure of a command, carrying the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments, configuration or input data (exit 1).
    Usage(String),
    /// A computation ran but missed its quality gate (exit 2).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sectorheat::error::Error> for CliError {
    fn from(e: sectorheat::error::Error) -> Self {
        use sectorheat::error::Error as E;
        match e {
            E::Domain(_) | E::Pole(_) | E::ModelBreakdown(_) | E::IncompleteTable(_) | E::Resource(_) => {
                CliError::Usage(e.to_string())
            }
            E::Accuracy { .. } | E::Bracket { .. } | E::Regularization { .. } | E::Conditioning(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
