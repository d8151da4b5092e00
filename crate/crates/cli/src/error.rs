use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Input was read but rejected; details were already reported.
    #[error("{0}")]
    Invalid(String),
    #[error("{0} is not set")]
    MissingCredential(&'static str),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            CliError::MissingCredential(_) => 3,
            CliError::Invalid(_) | CliError::Config(_) => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<trainkit::TrainError> for CliError {
    fn from(e: trainkit::TrainError) -> Self {
        match e {
            trainkit::TrainError::Pairs(p) => p.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<prefgen::PrefError> for CliError {
    fn from(e: prefgen::PrefError) -> Self {
        match e {
            prefgen::PrefError::Lvm(prefgen::LvmError::MissingCredential(var)) => CliError::MissingCredential(var),
            other => CliError::Invalid(other.to_string()),
        }
    }
}
