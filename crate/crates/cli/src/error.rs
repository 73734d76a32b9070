use receptive_jitai::dataset::DatasetError;
use receptive_jitai::eval::EvalError;
use receptive_jitai::models::ModelError;
use receptive_jitai::sim::SimError;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Process exit status for each error class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const INTERNAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration.
    #[error("{0}")]
    Usage(String),
    /// Inputs that do not parse or cannot support the requested analysis.
    #[error("{0}")]
    Data(String),
    /// A broken invariant or an I/O failure on our own outputs.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data(_) => exit::DATA,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Internal(format!("{}: {err}", path.display()))
    }

    /// Errors reading a user-supplied input are data errors.
    pub fn input(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }

    pub fn dataset(path: &Path, err: DatasetError) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(err: EvalError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(err: SimError) -> Self {
        match err {
            SimError::InvalidConfig(m) => CliError::Usage(format!("invalid config: {m}")),
            SimError::Invariant { .. } => CliError::Internal(err.to_string()),
            SimError::MissingModel(_) | SimError::Model(_) => CliError::Data(err.to_string()),
        }
    }
}

/// Path-tagged variant of `?` for reads of user inputs.
pub fn read_input(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::input(path, e))
}

pub type CliResult<T> = Result<T, CliError>;
