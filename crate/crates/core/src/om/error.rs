use thiserror::Error;

use crate::xml::{line_col, XmlError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OmError {
    #[error("malformed XML at {0}")]
    Xml(#[from] XmlError),
    #[error("{path} ({line}:{column}): {reason}")]
    Schema {
        path: String,
        reason: String,
        line: usize,
        column: usize,
    },
    #[error("symbol '{0}' is defined more than once")]
    DuplicateSymbol(String),
    #[error("unsupported OpenMath object kind {0}")]
    UnsupportedKind(String),
    #[error("empty application at {path}")]
    EmptyApplication { path: String },
    #[error("bound variable '{0}' is declared twice")]
    DuplicateBoundVariable(String),
    #[error("'{0}' is not a valid NCName")]
    InvalidName(String),
}

impl OmError {
    pub fn schema(src: &str, offset: usize, path: &str, reason: impl Into<String>) -> Self {
        let (line, column) = line_col(src, offset);
        OmError::Schema {
            path: path.to_string(),
            reason: reason.into(),
            line,
            column,
        }
    }

    /// Source position, when the error has one.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            OmError::Xml(e) => Some((e.line, e.column)),
            OmError::Schema { line, column, .. } => Some((*line, *column)),
            _ => None,
        }
    }

    /// Machine-readable error name.
    pub fn code(&self) -> &'static str {
        match self {
            OmError::Xml(_) => "XmlError",
            OmError::Schema { .. } => "SchemaError",
            OmError::DuplicateSymbol(_) => "DuplicateSymbol",
            OmError::UnsupportedKind(_) => "UnsupportedKind",
            OmError::EmptyApplication { .. } => "EmptyApplication",
            OmError::DuplicateBoundVariable(_) => "DuplicateBoundVariable",
            OmError::InvalidName(_) => "InvalidName",
        }
    }
}
