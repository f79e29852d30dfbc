//! Splitting CDs into CD / symbol / property-and-example fragments and
//! merging edited fragments back into one file.

mod id;
mod tree;

use thiserror::Error;

use crate::om::OmError;

pub use id::{fragment_for_symbol, FragmentId, Level, SubPart};
pub use tree::{
    apply_fragment_edit, include_link, reassemble, split_cd, split_source, FragmentKind,
    FragmentNode, FragmentTree, XINCLUDE_NS,
};
pub(crate) use tree::group_items;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("no fragment {0}")]
    UnknownFragment(FragmentId),
    #[error("'{0}' is not a fragment id")]
    InvalidId(String),
    #[error("'{0}' is not a valid NCName")]
    InvalidName(String),
    #[error("{kind} fragment does not parse ({line}:{column}): {message}")]
    FragmentParse {
        kind: FragmentKind,
        message: String,
        line: usize,
        column: usize,
    },
    #[error("<{element}> does not belong in {kind} fragment {id}")]
    GranularityViolation {
        id: FragmentId,
        kind: FragmentKind,
        element: String,
    },
    #[error("include of '{0}' does not resolve")]
    DanglingInclude(String),
    #[error("reassembled CD does not parse: {0}")]
    ReassemblyParse(OmError),
}

impl FragmentError {
    pub fn code(&self) -> &'static str {
        match self {
            FragmentError::UnknownFragment(_) => "UnknownFragment",
            FragmentError::InvalidId(_) => "InvalidFragmentId",
            FragmentError::InvalidName(_) => "InvalidName",
            FragmentError::FragmentParse { .. } => "FragmentParseError",
            FragmentError::GranularityViolation { .. } => "GranularityViolation",
            FragmentError::DanglingInclude(_) => "DanglingInclude",
            FragmentError::ReassemblyParse(_) => "ReassemblyParseError",
        }
    }

    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            FragmentError::FragmentParse { line, column, .. } => Some((*line, *column)),
            FragmentError::ReassemblyParse(e) => e.position(),
            _ => None,
        }
    }
}
