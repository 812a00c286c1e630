use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed spec {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] schottky_zeta::Error),
}

impl CliError {
    /// Process exit code; every error is an input error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
