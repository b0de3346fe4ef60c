use std::fmt::Display;
use std::io;
use std::path::Path;

use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

/// Failure of a subcommand, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation: flags, parameter values or the config file. Exit 1.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or malformed input data, or an I/O failure. Exit 2.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn usage(msg: impl Display) -> Self {
        CliError::Usage(msg.to_string())
    }

    pub fn data(msg: impl Display) -> Self {
        CliError::Data(msg.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<eventforge::Error> for CliError {
    fn from(e: eventforge::Error) -> Self {
        match e {
            eventforge::Error::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

/// Attaches a path to an I/O or library error.
pub trait Context<T> {
    fn at(self, path: impl AsRef<Path>) -> CliResult<T>;
}

impl<T> Context<T> for io::Result<T> {
    fn at(self, path: impl AsRef<Path>) -> CliResult<T> {
        self.map_err(|e| CliError::Data(format!("{}: {e}", path.as_ref().display())))
    }
}

impl<T> Context<T> for eventforge::Result<T> {
    fn at(self, path: impl AsRef<Path>) -> CliResult<T> {
        self.map_err(|e| match CliError::from(e) {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.as_ref().display())),
            CliError::Data(m) => CliError::Data(format!("{}: {m}", path.as_ref().display())),
        })
    }
}
