//! OpenMath objects, content dictionaries and signature files.

mod cd;
mod error;
mod names;
mod object;
mod sts;
mod validate;

pub use cd::{
    canonical_def, canonical_item, parse_cd, parse_cd_with, parse_symbol_def, serialize_cd,
    symbol_index, ContentDictionary, DefLayout, ExampleItem, ExampleSegment, MetadataEntry,
    ParseOptions, PropertyItem, PropertyKind, Role, RolePolicy, SourceLoc, SymbolDef, SymbolItem,
    CD_NS,
};
pub use error::OmError;
pub use names::is_ncname;
pub use object::{parse_om_object, OMObject, Symbol, SymbolKey, OM_NS};
pub(crate) use cd::parse_item;
pub use sts::{parse_sts, Signature, SignatureFile};
pub use validate::{validate_cd, Diagnostic, Severity};
