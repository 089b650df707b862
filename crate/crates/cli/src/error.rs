use selfonn::model::CheckpointError;
use selfonn::Error;

/// Exit statuses: 2 configuration, 3 data, 4 numeric divergence.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Lib(e) => match e {
                Error::Config(_) | Error::Shape(_) | Error::Json(_) => EXIT_CONFIG,
                Error::Checkpoint(CheckpointError::ShapeMismatch(_)) => EXIT_CONFIG,
                Error::Checkpoint(_)
                | Error::Manifest { .. }
                | Error::Recording { .. }
                | Error::Data(_)
                | Error::Io(_) => EXIT_DATA,
                Error::Divergence { .. } | Error::NonFinite(_) => EXIT_DIVERGENCE,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
