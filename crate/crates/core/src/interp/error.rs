use std::fmt;

use serde::Serialize;

use crate::syntax::ast::SourceLocation;
use crate::value::Schema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RuntimeErrorKind {
    DivisionByZero,
    IoError,
    HttpError,
    ConversionError,
    AssertionFailed,
    /// The run exceeded its wall-clock deadline. Not catchable by TRY.
    Timeout,
    /// An invariant the validator should have guaranteed did not hold.
    Internal,
}

/// Failure while executing a statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub message: String,
    /// Location of the statement that raised the error.
    pub location: SourceLocation,
    pub step: String,
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?} in step {}: {}", self.location, self.kind, self.step, self.message)
    }
}

impl std::error::Error for RuntimeError {}

/// Input tables that do not match the pipeline's INPUT declarations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InputError {
    #[error("missing input table {0}")]
    Missing(String),
    #[error("input {0} is not declared by the pipeline")]
    Unexpected(String),
    #[error("input {name} has schema {actual}, declared {expected}")]
    SchemaMismatch { name: String, expected: Schema, actual: Schema },
    #[error("INPUT {name} declaration is invalid: {message}")]
    BadDeclaration { name: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Error raised below statement level; the statement adds its location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalError {
    pub kind: RuntimeErrorKind,
    pub message: String,
}

impl EvalError {
    pub fn new(kind: RuntimeErrorKind, message: impl Into<String>) -> Self {
        EvalError { kind, message: message.into() }
    }

    pub(crate) fn internal(message: impl Into<String>) -> Self {
        EvalError::new(RuntimeErrorKind::Internal, message)
    }

    pub(crate) fn conversion(message: impl Into<String>) -> Self {
        EvalError::new(RuntimeErrorKind::ConversionError, message)
    }
}

impl From<(RuntimeErrorKind, String)> for EvalError {
    fn from((kind, message): (RuntimeErrorKind, String)) -> Self {
        EvalError { kind, message }
    }
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}
