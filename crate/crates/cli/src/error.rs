use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("infeasible: {summary}")]
    Infeasible { summary: String, diagnosis: Value },
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Input { .. } | CliError::Internal(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Infeasible { .. } => 3,
            CliError::Degenerate(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Input { .. } => "invalid_input",
            CliError::Usage(_) => "usage",
            CliError::Infeasible { .. } => "infeasible",
            CliError::Degenerate(_) => "degenerate_outcome",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Infeasible { diagnosis, .. } = self {
            v["diagnosis"] = diagnosis.clone();
        }
        v
    }
}
