use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("cannot parse {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] ncball::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ncball::Error as E;
        match self {
            CliError::Numerical(_) | CliError::Core(E::NoConvergence | E::Divergent(_) | E::InversionProbeFailed(_)) => {
                EXIT_NUMERICAL
            }
            _ => EXIT_INPUT,
        }
    }
}
