use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("scenario does not match the schema:\n  {}", .0.join("\n  "))]
    Schema(Vec<String>),

    #[error("numerical abort during {stage}: {source}")]
    Numerical { stage: String, source: causalkit::Error },

    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
}

impl CliError {
    pub fn schema(msg: impl Into<String>) -> Self {
        CliError::Schema(vec![msg.into()])
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Numerical { .. } | CliError::Write { .. } => EXIT_NUMERICAL,
        }
    }
}

/// Attaches the stage name to a core error.
pub trait Stage<T> {
    fn stage(self, stage: &str) -> Result<T, CliError>;
}

impl<T> Stage<T> for causalkit::Result<T> {
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { stage: stage.to_string(), source })
    }
}
