use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pidcert::Error),

    #[error("I/O error at {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("CSV error at {}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid config: {0}")]
    Config(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(pidcert::Error::InfeasibleDomain { .. }) => "infeasible_domain",
            CliError::Core(pidcert::Error::Conditioning { .. }) => "conditioning",
            CliError::Core(_) => "validation",
            CliError::Io { .. } => "io",
            CliError::Csv { .. } => "csv",
            CliError::Json(_) => "json",
            CliError::Config(_) => "config",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}
