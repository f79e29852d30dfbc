use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::FragmentError;
use crate::om::is_ncname;

/// Position of a property or example fragment within its symbol, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubPart {
    Prop(usize),
    Ex(usize),
}

/// Address of a fragment: `cd:<CD>`, `cd:<CD>+<symbol>`,
/// `cd:<CD>+<symbol>+prop<k>` or `cd:<CD>+<symbol>+ex<k>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FragmentId {
    pub cd: String,
    pub symbol: Option<String>,
    pub part: Option<SubPart>,
}

impl FragmentId {
    pub fn cd(cd: impl Into<String>) -> Self {
        FragmentId {
            cd: cd.into(),
            symbol: None,
            part: None,
        }
    }

    pub fn symbol(cd: impl Into<String>, symbol: impl Into<String>) -> Self {
        FragmentId {
            cd: cd.into(),
            symbol: Some(symbol.into()),
            part: None,
        }
    }

    pub fn with_part(&self, part: SubPart) -> Self {
        FragmentId {
            part: Some(part),
            ..self.clone()
        }
    }

    /// The enclosing fragment: property/example → symbol → CD.
    pub fn parent(&self) -> Option<FragmentId> {
        match (&self.symbol, &self.part) {
            (Some(_), Some(_)) => Some(FragmentId {
                part: None,
                ..self.clone()
            }),
            (Some(_), None) => Some(FragmentId::cd(self.cd.clone())),
            _ => None,
        }
    }

    /// This id and all enclosing ones, innermost first.
    pub fn ancestors_and_self(&self) -> Vec<FragmentId> {
        let mut out = vec![self.clone()];
        while let Some(p) = out.last().unwrap().parent() {
            out.push(p);
        }
        out
    }

    pub fn level(&self) -> Level {
        match (&self.symbol, &self.part) {
            (None, _) => Level::Cd,
            (Some(_), None) => Level::Symbol,
            (Some(_), Some(_)) => Level::Item,
        }
    }
}

/// Granularity level of a fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Cd,
    Symbol,
    Item,
}

impl fmt::Display for FragmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cd:{}", self.cd)?;
        if let Some(s) = &self.symbol {
            write!(f, "+{s}")?;
        }
        match self.part {
            Some(SubPart::Prop(k)) => write!(f, "+prop{k}"),
            Some(SubPart::Ex(k)) => write!(f, "+ex{k}"),
            None => Ok(()),
        }
    }
}

impl FromStr for FragmentId {
    type Err = FragmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FragmentError::InvalidId(s.to_string());
        let rest = s.strip_prefix("cd:").ok_or_else(bad)?;
        let mut parts = rest.split('+');
        let cd = parts.next().filter(|c| is_ncname(c)).ok_or_else(bad)?;
        let mut id = FragmentId::cd(cd);
        if let Some(sym) = parts.next() {
            if !is_ncname(sym) {
                return Err(bad());
            }
            id.symbol = Some(sym.to_string());
        }
        if let Some(part) = parts.next() {
            let index = |digits: &str| -> Option<usize> {
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
                    return None;
                }
                digits.parse().ok()
            };
            id.part = Some(if let Some(k) = part.strip_prefix("prop") {
                SubPart::Prop(index(k).ok_or_else(bad)?)
            } else if let Some(k) = part.strip_prefix("ex") {
                SubPart::Ex(index(k).ok_or_else(bad)?)
            } else {
                return Err(bad());
            });
        }
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(id)
    }
}

impl Serialize for FragmentId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FragmentId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Page id of a symbol definition. Purely syntactic.
pub fn fragment_for_symbol(cd_name: &str, symbol: &str) -> Result<FragmentId, FragmentError> {
    for part in [cd_name, symbol] {
        if !is_ncname(part) {
            return Err(FragmentError::InvalidName(part.to_string()));
        }
    }
    Ok(FragmentId::symbol(cd_name, symbol))
}
