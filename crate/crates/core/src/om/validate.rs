use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use super::cd::{ContentDictionary, Role};
use super::object::SymbolKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Short machine-readable kind, e.g. `unresolved-reference`.
    pub code: &'static str,
    pub message: String,
    /// CD the diagnostic belongs to.
    pub cd: String,
    /// Symbol definition the diagnostic belongs to, if any.
    pub symbol: Option<String>,
    /// The offending reference for `unresolved-reference`.
    pub reference: Option<SymbolKey>,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Check a CD against itself and a set of peer CDs.
///
/// Reports symbol references in FMPs and examples that resolve to no known
/// definition (warning), definitions without a role (warning), roles outside
/// the standard set (warning) and missing descriptions (error).
pub fn validate_cd<'a>(
    cd: &ContentDictionary,
    peers: impl IntoIterator<Item = &'a ContentDictionary>,
) -> Vec<Diagnostic> {
    let mut known: HashSet<SymbolKey> = cd
        .symbols
        .iter()
        .map(|s| SymbolKey::new(cd.name(), s.name.clone()))
        .collect();
    for peer in peers {
        known.extend(
            peer.symbols
                .iter()
                .map(|s| SymbolKey::new(peer.name(), s.name.clone())),
        );
    }

    let cd_name = cd.name().to_string();
    let diag = |severity, code, message: String, symbol: &str, reference| Diagnostic {
        severity,
        code,
        message,
        cd: cd_name.clone(),
        symbol: Some(symbol.to_string()),
        reference,
    };

    let mut out = Vec::new();
    for def in &cd.symbols {
        match &def.role {
            None => out.push(diag(
                Severity::Warning,
                "missing-role",
                format!("{} has no Role", def.name),
                &def.name,
                None,
            )),
            Some(Role::Other(r)) => out.push(diag(
                Severity::Warning,
                "unknown-role",
                format!("{} has non-standard role '{r}'", def.name),
                &def.name,
                None,
            )),
            Some(_) => {}
        }
        if def.description.trim().is_empty() {
            out.push(diag(
                Severity::Error,
                "missing-description",
                format!("{} has no Description", def.name),
                &def.name,
                None,
            ));
        }
        let unresolved: BTreeSet<SymbolKey> = def
            .objects()
            .flat_map(|o| o.symbols())
            .map(|s| s.key())
            .filter(|k| !known.contains(k))
            .collect();
        for key in unresolved {
            out.push(diag(
                Severity::Warning,
                "unresolved-reference",
                format!("{} refers to unknown symbol {key}", def.name),
                &def.name,
                Some(key),
            ));
        }
    }
    out
}
