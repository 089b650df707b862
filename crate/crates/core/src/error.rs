use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Checkpoint(#[from] crate::model::checkpoint::CheckpointError),

    #[error("{path}:{line}: {message}")]
    Manifest {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Recording { path: PathBuf, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("training diverged at epoch {epoch}, {}: loss = {loss}", match batch {
        Some(b) => format!("batch {b}"),
        None => "validation pass".to_string(),
    })]
    Divergence {
        epoch: usize,
        batch: Option<usize>,
        loss: f64,
    },

    #[error("non-finite network output: {0:?}")]
    NonFinite(Vec<f64>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
