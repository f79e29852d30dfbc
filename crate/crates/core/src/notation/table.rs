use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::NotationError;
use crate::om::{is_ncname, SymbolKey};
use crate::xml::{self, escape_attr};

/// Precedence of function application; every operator is below it.
pub const CALL_PRECEDENCE: u32 = 1001;
pub const MAX_PRECEDENCE: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixity {
    Infix,
    Prefix,
    Postfix,
    Function,
    Binder,
}

impl Fixity {
    pub fn as_str(self) -> &'static str {
        match self {
            Fixity::Infix => "infix",
            Fixity::Prefix => "prefix",
            Fixity::Postfix => "postfix",
            Fixity::Function => "function",
            Fixity::Binder => "binder",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "infix" => Fixity::Infix,
            "prefix" => Fixity::Prefix,
            "postfix" => Fixity::Postfix,
            "function" => Fixity::Function,
            "binder" => Fixity::Binder,
            _ => return None,
        })
    }

    /// Glyphs of these fixities are read where an operand is expected.
    pub fn in_operand_position(self) -> bool {
        matches!(self, Fixity::Prefix | Fixity::Function | Fixity::Binder)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assoc {
    Left,
    Right,
    None,
}

impl Assoc {
    pub fn as_str(self) -> &'static str {
        match self {
            Assoc::Left => "left",
            Assoc::Right => "right",
            Assoc::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NotationDef {
    pub symbol: SymbolKey,
    pub fixity: Fixity,
    pub glyph: String,
    pub precedence: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assoc: Option<Assoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
}

impl NotationDef {
    pub fn new(cd: &str, name: &str, fixity: Fixity, glyph: &str, precedence: u32, assoc: Option<Assoc>) -> Self {
        NotationDef {
            symbol: SymbolKey::new(cd, name),
            fixity,
            glyph: glyph.to_string(),
            precedence,
            assoc,
            arity: None,
        }
    }

    pub fn infix(cd: &str, name: &str, glyph: &str, precedence: u32, assoc: Assoc) -> Self {
        Self::new(cd, name, Fixity::Infix, glyph, precedence, Some(assoc))
    }

    pub fn prefix(cd: &str, name: &str, glyph: &str, precedence: u32) -> Self {
        Self::new(cd, name, Fixity::Prefix, glyph, precedence, None)
    }

    pub fn postfix(cd: &str, name: &str, glyph: &str, precedence: u32) -> Self {
        Self::new(cd, name, Fixity::Postfix, glyph, precedence, None)
    }

    pub fn function(cd: &str, name: &str, glyph: &str) -> Self {
        Self::new(cd, name, Fixity::Function, glyph, MAX_PRECEDENCE, None)
    }

    pub fn binder(cd: &str, name: &str, glyph: &str) -> Self {
        Self::new(cd, name, Fixity::Binder, glyph, 0, None)
    }

    /// Check the single-definition rules: a usable glyph, a precedence in
    /// range, and associativity exactly for infix operators.
    pub fn check(&self) -> Result<(), NotationError> {
        let invalid = |reason: &str| NotationError::Invalid {
            symbol: self.symbol.clone(),
            reason: reason.to_string(),
        };
        if !is_ncname(&self.symbol.cd) || !is_ncname(&self.symbol.name) {
            return Err(invalid("symbol reference is not a pair of NCNames"));
        }
        if self.glyph.is_empty() {
            return Err(invalid("empty glyph"));
        }
        if self.glyph.chars().any(|c| c.is_whitespace() || "#`\"(),[]".contains(c)) {
            return Err(invalid("glyph contains whitespace or one of # ` \" ( ) , [ ]"));
        }
        let first = self.glyph.chars().next().unwrap();
        if first.is_ascii_digit() || first == '.' {
            return Err(invalid("glyph starts with a digit or '.'"));
        }
        if self.fixity.in_operand_position() && first == '-' {
            return Err(invalid("prefix, function and binder glyphs may not start with '-'"));
        }
        if self.fixity.in_operand_position() && is_ident_char(first) && !self.glyph.chars().all(is_ident_char) {
            return Err(invalid("a glyph starting with a letter must be a whole word"));
        }
        if self.precedence > MAX_PRECEDENCE {
            return Err(invalid("precedence above 1000"));
        }
        match (self.fixity, self.assoc) {
            (Fixity::Infix, None) => return Err(invalid("infix notation needs an associativity")),
            (Fixity::Infix, Some(_)) | (_, None) => {}
            (_, Some(_)) => return Err(invalid("associativity is only meaningful for infix")),
        }
        Ok(())
    }
}

impl fmt::Display for NotationDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} '{}' {}", self.symbol, self.fixity.as_str(), self.glyph, self.precedence)?;
        if let Some(a) = self.assoc {
            write!(f, " {}", a.as_str())?;
        }
        Ok(())
    }
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Whether `glyph` can be read at the start of `text`: it must be a prefix,
/// and a glyph ending in a word character may not run into another one.
pub(crate) fn glyph_matches(glyph: &str, text: &str) -> bool {
    if !text.starts_with(glyph) {
        return false;
    }
    let last = glyph.chars().next_back().unwrap();
    match text[glyph.len()..].chars().next() {
        Some(next) => !(is_ident_char(last) && is_ident_char(next)),
        None => true,
    }
}

/// A set of notation definitions, at most one per symbol, whose glyphs can be
/// told apart by the linear reader.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NotationTable {
    defs: HashMap<SymbolKey, NotationDef>,
    operand_glyphs: Vec<(String, SymbolKey)>,
    operator_glyphs: Vec<(String, SymbolKey)>,
}

impl NotationTable {
    pub fn new(defs: impl IntoIterator<Item = NotationDef>) -> Result<Self, NotationError> {
        let mut map: HashMap<SymbolKey, NotationDef> = HashMap::new();
        for d in defs {
            d.check()?;
            if map.contains_key(&d.symbol) {
                return Err(NotationError::DuplicateSymbol(d.symbol.clone()));
            }
            map.insert(d.symbol.clone(), d);
        }
        let mut operand: Vec<(String, SymbolKey)> = Vec::new();
        let mut operator: Vec<(String, SymbolKey)> = Vec::new();
        let mut sorted: Vec<&NotationDef> = map.values().collect();
        sorted.sort_by(|a, b| a.symbol.cmp(&b.symbol));
        for d in sorted {
            let list = if d.fixity.in_operand_position() {
                &mut operand
            } else {
                &mut operator
            };
            for (g, other) in list.iter() {
                let clash = g == &d.glyph
                    || (d.glyph.len() > g.len() && glyph_prefix_clash(g, &d.glyph))
                    || (g.len() > d.glyph.len() && glyph_prefix_clash(&d.glyph, g));
                if clash {
                    return Err(NotationError::AmbiguousTable {
                        glyph: d.glyph.clone(),
                        first: other.clone(),
                        second: d.symbol.clone(),
                    });
                }
            }
            list.push((d.glyph.clone(), d.symbol.clone()));
        }
        // Longest glyph first, so the reader takes the longest match.
        for list in [&mut operand, &mut operator] {
            list.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        }
        Ok(NotationTable {
            defs: map,
            operand_glyphs: operand,
            operator_glyphs: operator,
        })
    }

    pub fn get(&self, symbol: &SymbolKey) -> Option<&NotationDef> {
        self.defs.get(symbol)
    }

    pub fn lookup(&self, cd: &str, name: &str) -> Option<&NotationDef> {
        self.defs.get(&SymbolKey::new(cd, name))
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// All definitions sorted by symbol.
    pub fn defs(&self) -> Vec<&NotationDef> {
        let mut v: Vec<&NotationDef> = self.defs.values().collect();
        v.sort_by(|a, b| a.symbol.cmp(&b.symbol));
        v
    }

    /// Definitions for the symbols of one CD, sorted by name.
    pub fn for_cd(&self, cd: &str) -> Vec<&NotationDef> {
        self.defs().into_iter().filter(|d| d.symbol.cd == cd).collect()
    }

    /// A new table with every definition for `cd` replaced by `defs`.
    pub fn with_cd(&self, cd: &str, defs: Vec<NotationDef>) -> Result<Self, NotationError> {
        NotationTable::new(
            self.defs
                .values()
                .filter(|d| d.symbol.cd != cd)
                .cloned()
                .chain(defs),
        )
    }

    /// A glyph read where an operand is expected (prefix, function, binder).
    pub(crate) fn match_operand(&self, text: &str) -> Option<&NotationDef> {
        self.operand_glyphs
            .iter()
            .find(|(g, _)| glyph_matches(g, text))
            .map(|(_, k)| &self.defs[k])
    }

    /// A glyph read after an operand (infix, postfix).
    pub(crate) fn match_operator(&self, text: &str) -> Option<&NotationDef> {
        self.operator_glyphs
            .iter()
            .find(|(g, _)| glyph_matches(g, text))
            .map(|(_, k)| &self.defs[k])
    }

    /// Whether a bare identifier would be read as an operand glyph.
    pub(crate) fn is_operand_word(&self, word: &str) -> bool {
        self.operand_glyphs.iter().any(|(g, _)| g == word)
    }
}

/// `short` is a proper prefix of `long` and the reader could stop after it.
fn glyph_prefix_clash(short: &str, long: &str) -> bool {
    long.starts_with(short) && glyph_matches(short, long)
}

/// Parse a `NotationDictionary` document.
pub fn parse_ntn(src: &str) -> Result<Vec<NotationDef>, NotationError> {
    let doc = xml::parse_document(src)?;
    let root = &doc.root;
    let bad = |offset: usize, reason: String| {
        let (line, column) = xml::line_col(src, offset);
        NotationError::Dictionary { line, column, reason }
    };
    if root.local_name() != "NotationDictionary" {
        return Err(bad(root.span.start, "root element must be <NotationDictionary>".into()));
    }
    let cd = root
        .attr("cd")
        .ok_or_else(|| bad(root.span.start, "NotationDictionary without cd attribute".into()))?;
    let mut out = Vec::new();
    for el in root.child_elements() {
        if el.local_name() != "notation" {
            return Err(bad(el.span.start, format!("unknown element <{}>", el.local_name())));
        }
        let attr = |name: &str| {
            el.attr(name)
                .ok_or_else(|| bad(el.span.start, format!("notation without {name}")))
        };
        let fixity = Fixity::parse(attr("fixity")?)
            .ok_or_else(|| bad(el.span.start, format!("unknown fixity '{}'", el.attr("fixity").unwrap_or(""))))?;
        let precedence = match el.attr("precedence") {
            Some(p) => p
                .trim()
                .parse()
                .map_err(|_| bad(el.span.start, format!("precedence '{p}' is not a number")))?,
            None if fixity == Fixity::Function => MAX_PRECEDENCE,
            None if fixity == Fixity::Binder => 0,
            None => return Err(bad(el.span.start, "notation without precedence".into())),
        };
        let assoc = match el.attr("assoc") {
            None => None,
            Some("left") => Some(Assoc::Left),
            Some("right") => Some(Assoc::Right),
            Some("none") => Some(Assoc::None),
            Some(other) => return Err(bad(el.span.start, format!("unknown associativity '{other}'"))),
        };
        let arity = match el.attr("arity") {
            Some(a) => Some(
                a.trim()
                    .parse()
                    .map_err(|_| bad(el.span.start, format!("arity '{a}' is not a number")))?,
            ),
            None => None,
        };
        let def = NotationDef {
            symbol: SymbolKey::new(el.attr("cd").unwrap_or(cd), attr("name")?),
            fixity,
            glyph: attr("glyph")?.to_string(),
            precedence,
            assoc,
            arity,
        };
        def.check()?;
        out.push(def);
    }
    Ok(out)
}

/// Canonical `NotationDictionary` text for one CD.
pub fn serialize_ntn(cd: &str, defs: &[&NotationDef]) -> String {
    let mut out = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<NotationDictionary cd=\"{}\">\n",
        escape_attr(cd)
    );
    let mut sorted: Vec<&&NotationDef> = defs.iter().collect();
    sorted.sort_by(|a, b| a.symbol.cmp(&b.symbol));
    for d in sorted {
        let mut attrs: BTreeMap<&str, String> = BTreeMap::new();
        if let Some(a) = d.assoc {
            attrs.insert("assoc", a.as_str().into());
        }
        if let Some(n) = d.arity {
            attrs.insert("arity", n.to_string());
        }
        if d.symbol.cd != cd {
            attrs.insert("cd", d.symbol.cd.clone());
        }
        attrs.insert("fixity", d.fixity.as_str().into());
        attrs.insert("glyph", d.glyph.clone());
        attrs.insert("name", d.symbol.name.clone());
        attrs.insert("precedence", d.precedence.to_string());
        let pairs: Vec<(&str, &str)> = attrs.iter().map(|(k, v)| (*k, v.as_str())).collect();
        out.push(' ');
        out.push_str(&xml::start_tag("notation", &pairs, true));
        out.push('\n');
    }
    out.push_str("</NotationDictionary>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ambiguous_glyphs_are_rejected() {
        let plus = NotationDef::infix("a", "plus", "+", 500, Assoc::Left);
        let plus2 = NotationDef::infix("a", "plus2", "+", 500, Assoc::Left);
        assert!(matches!(NotationTable::new([plus.clone(), plus2]), Err(NotationError::AmbiguousTable { .. })));
        let le = NotationDef::infix("r", "le", "<=", 200, Assoc::None);
        let lt = NotationDef::infix("r", "lt", "<", 200, Assoc::None);
        assert!(matches!(NotationTable::new([le, lt]), Err(NotationError::AmbiguousTable { .. })));
        // Same glyph in different positions is fine.
        let neg = NotationDef::prefix("a", "neg", "+", 700);
        assert!(NotationTable::new([plus, neg]).is_ok());
        // Word glyphs only clash on the whole word.
        let sin = NotationDef::function("t", "sin", "sin");
        let sinh = NotationDef::function("t", "sinh", "sinh");
        assert!(NotationTable::new([sin, sinh]).is_ok());
    }

    #[test]
    fn definition_rules() {
        assert!(NotationDef::new("a", "b", Fixity::Infix, "+", 5, None).check().is_err());
        assert!(NotationDef::prefix("a", "b", "-", 5).check().is_err());
        assert!(NotationDef::prefix("a", "b", "", 5).check().is_err());
        assert!(NotationDef::prefix("a", "b", "x", 1001).check().is_err());
        assert!(NotationDef::infix("a", "b", "(", 5, Assoc::Left).check().is_err());
    }

    #[test]
    fn ntn_round_trip() {
        let src = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<NotationDictionary cd=\"arith1\">\n <notation assoc=\"left\" fixity=\"infix\" glyph=\"+\" name=\"plus\" precedence=\"500\"/>\n <notation fixity=\"prefix\" glyph=\"−\" name=\"unary_minus\" precedence=\"700\"/>\n</NotationDictionary>\n";
        let defs = parse_ntn(src).unwrap();
        assert_eq!(defs.len(), 2);
        assert_eq!(defs[0].assoc, Some(Assoc::Left));
        let refs: Vec<&NotationDef> = defs.iter().collect();
        assert_eq!(serialize_ntn("arith1", &refs), src);
    }
}
