use thiserror::Error;

use crate::notation::NotationDiagnostic;

/// Violations of the grasp algebra invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraspError {
    #[error("invalid grasp unit: {0}")]
    InvalidUnit(String),
    #[error("invalid grasp state: {0}")]
    InvalidState(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{diagnostic}")]
pub struct ParseError {
    pub diagnostic: NotationDiagnostic,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("invalid transition: {0}")]
    InvalidTransition(String),
}

/// Problems found while loading corpus documents.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("{file}: missing document")]
    MissingDocument { file: String },
    #[error("{file}:{line}:{column}: {message}")]
    Malformed { file: String, line: usize, column: usize, message: String },
    #[error("{file}: {record}: dangling reference: {message}")]
    DanglingReference { file: String, record: String, message: String },
    #[error("{file}: {record}: {message}")]
    Invalid { file: String, record: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("state {state} cannot be realized with the given grippers and environment")]
    UnrealizableState { state: String },
    #[error("no plan found after exploring {explored} states")]
    NoPlanFound { explored: usize },
    #[error("explored-state budget of {budget} exhausted")]
    BoundExceeded { budget: usize },
    #[error("invalid cost weights: {0}")]
    InvalidWeights(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("enumeration would exceed the cap of {cap} states")]
    BoundExceeded { cap: usize },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
}
