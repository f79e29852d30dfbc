//! Small Type System signature files.

use serde::Serialize;

use super::cd::ContentDictionary;
use super::error::OmError;
use super::object::{from_omobj, OMObject, SymbolKey};
use super::validate::{Diagnostic, Severity};
use crate::xml::{self, Node};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Signature {
    pub symbol: SymbolKey,
    #[serde(skip)]
    pub type_object: OMObject,
}

#[derive(Debug, Clone, Default)]
pub struct SignatureFile {
    pub signatures: Vec<Signature>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parse a `CDSignatures` document against the CD it describes. Signatures for
/// symbols the CD does not define are kept and reported as warnings.
pub fn parse_sts(src: &str, cd: &ContentDictionary) -> Result<SignatureFile, OmError> {
    if src.trim().is_empty() {
        return Ok(SignatureFile::default());
    }
    let doc = xml::parse_document(src)?;
    let root = &doc.root;
    if root.local_name() != "CDSignatures" {
        return Err(OmError::schema(
            src,
            root.span.start,
            root.local_name(),
            "root element must be <CDSignatures>",
        ));
    }
    let cd_name = root.attr("cd").unwrap_or(cd.name()).to_string();
    let mut out = SignatureFile::default();
    for node in &root.children {
        let Node::Element(el) = node else { continue };
        match el.local_name() {
            "CDSComment" => {}
            "Signature" => {
                let path = format!("CDSignatures/Signature[{}]", out.signatures.len() + 1);
                let name = el.attr("name").ok_or_else(|| {
                    OmError::schema(src, el.span.start, &path, "Signature without name")
                })?;
                let omobj = el
                    .child_elements()
                    .find(|c| c.local_name() == "OMOBJ")
                    .ok_or_else(|| {
                        OmError::schema(src, el.span.start, &path, "Signature without OMOBJ")
                    })?;
                let type_object = from_omobj(src, omobj, &format!("{path}/OMOBJ"))?;
                let symbol = SymbolKey::new(cd_name.clone(), name.trim());
                if cd_name != cd.name() || cd.symbol(&symbol.name).is_none() {
                    out.diagnostics.push(Diagnostic {
                        severity: Severity::Warning,
                        code: "unknown-signature-symbol",
                        message: format!("signature for undefined symbol {symbol}"),
                        cd: cd.name().to_string(),
                        symbol: Some(symbol.name.clone()),
                        reference: Some(symbol.clone()),
                    });
                }
                out.signatures.push(Signature { symbol, type_object });
            }
            other => {
                return Err(OmError::schema(
                    src,
                    el.span.start,
                    "CDSignatures",
                    format!("unknown element <{other}>"),
                ));
            }
        }
    }
    Ok(out)
}
