//! File formats and command-line front end for `cpskit-core`.

pub mod cli;
pub mod format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("{0}: invalid JSON: {1}")]
    Json(String, serde_json::Error),
    #[error("invalid file contents: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] cpskit_core::Error),
}
