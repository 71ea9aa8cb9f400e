use thiserror::Error;

use crate::model::UeId;

/// Errors from instance construction, validation and scoring.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("score is not finite: {0}")]
    NonFinite(f64),
    #[error("threshold {0} outside [0, 10]")]
    ThresholdOutOfRange(f64),
    #[error("{field}: {reason}")]
    InvalidInstance { field: String, reason: String },
    #[error("UE {0} is not part of this instance")]
    UnknownUe(UeId),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("LI score undefined for a UE and itself (UE {0})")]
    SelfPair(UeId),
    #[error("edge server LII must be positive")]
    EdgeServerLii,
    #[error("instance already has an edge server")]
    EdgeServerPresent,
    #[error("instance must have at least one UE")]
    Empty,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl ModelError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::InvalidInstance {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Errors from the exact solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no assignment satisfies the constraints")]
    Infeasible,
    #[error("instance has {n} UEs, above the limit of {limit}")]
    LimitExceeded { n: usize, limit: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by the protocol state machines and the fallback process.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("UE {node} ({role}) cannot handle {event}")]
    ProtocolViolation {
        node: UeId,
        role: &'static str,
        event: String,
    },
    #[error("edge server fallback needed for {0} UE(s) but the policy is disabled")]
    EdgeServerUnavailable(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from the benchmark pipeline.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
