use std::path::PathBuf;

use liseq::pmpds::PdsError;
use liseq::seq_lazy::TransformError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Rendered diagnostics.
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Pds(#[from] PdsError),
    #[error("{path}: bad JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Every error is a usage or input problem.
    pub fn exit_code(&self) -> u8 {
        2
    }
}
