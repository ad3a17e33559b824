use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, grouped by the exit code they map to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration file contents.
    #[error("configuration error: {0}")]
    Config(String),

    /// Missing, unreadable or unusable input data.
    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Training diverged or produced no usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub const EXIT_USAGE: i32 = 1;
    pub const EXIT_DATA: i32 = 2;
    pub const EXIT_NUMERICAL: i32 = 3;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => Self::EXIT_USAGE,
            CliError::Data(_) | CliError::Io { .. } => Self::EXIT_DATA,
            CliError::Numerical(_) => Self::EXIT_NUMERICAL,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl From<nodeclass::Error> for CliError {
    fn from(e: nodeclass::Error) -> Self {
        use nodeclass::Error as E;
        match e {
            E::NonFinite { .. } => CliError::Numerical(e.to_string()),
            E::InvalidArgument(_) => CliError::Config(e.to_string()),
            E::Io { .. }
            | E::Parse { .. }
            | E::EmptyFile { .. }
            | E::DuplicateNode(_)
            | E::Shape(_)
            | E::TooFewClasses(_) => CliError::Data(e.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
