use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI run, one variant per exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Unsupported(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    /// Prefixes the message with the config field it concerns.
    pub fn at(field: &str, err: fraclv::Error) -> Self {
        match CliError::from(err) {
            CliError::Config(m) => CliError::Config(format!("{field}: {m}")),
            other => other,
        }
    }
}

impl From<fraclv::Error> for CliError {
    fn from(err: fraclv::Error) -> Self {
        use fraclv::Error as E;
        let msg = err.to_string();
        match err {
            E::Input(_)
            | E::Domain(_)
            | E::Precision { .. }
            | E::Degenerate(_)
            | E::NotEquilibrium { .. } => CliError::Config(msg),
            E::Unsupported(m) => CliError::Unsupported(m),
            E::Numeric(m) => CliError::Numeric(m),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
