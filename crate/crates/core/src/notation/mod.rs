//! Declarative notations: rendering to Presentation MathML with parallel
//! markup, and a linear text form that can be read back.

mod layout;
mod linear;
mod mathml;
mod page;
mod table;

use thiserror::Error;

use crate::om::SymbolKey;
use crate::xml::XmlError;

pub use linear::{linearize, linearize_with_fences, parse_linear};
pub use mathml::{render_object, render_object_with, RenderedPage, MATHML_NS};
pub use page::{page_href, render_page, KnownSymbols};
pub use table::{
    parse_ntn, serialize_ntn, Assoc, Fixity, NotationDef, NotationTable, CALL_PRECEDENCE, MAX_PRECEDENCE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotationError {
    #[error("invalid notation for {symbol}: {reason}")]
    Invalid { symbol: SymbolKey, reason: String },
    #[error("more than one notation for {0}")]
    DuplicateSymbol(SymbolKey),
    #[error("glyph '{glyph}' of {second} cannot be told apart from the glyph of {first}")]
    AmbiguousTable {
        glyph: String,
        first: SymbolKey,
        second: SymbolKey,
    },
    #[error("malformed XML at {0}")]
    Xml(#[from] XmlError),
    #[error("notation dictionary ({line}:{column}): {reason}")]
    Dictionary { line: usize, column: usize, reason: String },
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown fragment {0}")]
    UnknownFragment(String),
}

impl NotationError {
    pub fn code(&self) -> &'static str {
        match self {
            NotationError::Invalid { .. } => "InvalidNotation",
            NotationError::DuplicateSymbol(_) => "DuplicateNotation",
            NotationError::AmbiguousTable { .. } => "AmbiguousTable",
            NotationError::Xml(_) => "XmlError",
            NotationError::Dictionary { .. } => "NotationDictionaryError",
            NotationError::Parse { .. } => "ParseError",
            NotationError::UnknownFragment(_) => "UnknownFragment",
        }
    }

    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            NotationError::Xml(e) => Some((e.line, e.column)),
            NotationError::Dictionary { line, column, .. } | NotationError::Parse { line, column, .. } => {
                Some((*line, *column))
            }
            _ => None,
        }
    }
}
