//! Content dictionary documents.
//!
//! A parsed [`ContentDictionary`] keeps its source text. Every metadata entry,
//! symbol definition and property/example item remembers the byte span it came
//! from together with the whitespace and comments that preceded it (its
//! "lead"). [`serialize_cd`] uses that to write unchanged parts back verbatim
//! and only re-encodes what was edited, so an untouched model reproduces its
//! input byte for byte.

use std::collections::{HashMap, HashSet};

use super::error::OmError;
use super::names::is_ncname;
use super::object::{from_omobj, OMObject};
use crate::xml::{self, escape_text, Element, Node, Span};

/// Namespace of the CD document vocabulary.
pub const CD_NS: &str = "http://www.openmath.org/OpenMathCD";

const METADATA_KEYS: &[&str] = &[
    "CDName",
    "CDURL",
    "CDBase",
    "CDReviewDate",
    "CDDate",
    "CDVersion",
    "CDRevision",
    "CDStatus",
    "CDUses",
    "Description",
];

/// What to do with a `Role` value outside the OpenMath 2 set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RolePolicy {
    /// Keep it as [`Role::Other`]; `validate_cd` reports a warning.
    #[default]
    Warn,
    /// Fail with a schema error.
    Reject,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub unknown_role: RolePolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Role {
    Application,
    Binder,
    Constant,
    Attribution,
    SemanticAttribution,
    Error,
    Other(String),
}

impl Role {
    pub fn parse(s: &str) -> Role {
        match s {
            "application" => Role::Application,
            "binder" => Role::Binder,
            "constant" => Role::Constant,
            "attribution" => Role::Attribution,
            "semantic-attribution" => Role::SemanticAttribution,
            "error" => Role::Error,
            other => Role::Other(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Role::Application => "application",
            Role::Binder => "binder",
            Role::Constant => "constant",
            Role::Attribution => "attribution",
            Role::SemanticAttribution => "semantic-attribution",
            Role::Error => "error",
            Role::Other(s) => s,
        }
    }
}

/// Where a parsed element came from: its own span and the trivia before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceLoc {
    pub span: Span,
    pub lead: Span,
}

#[derive(Debug, Clone)]
pub struct MetadataEntry {
    pub key: String,
    pub value: String,
    pub loc: Option<SourceLoc>,
}

impl PartialEq for MetadataEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.value == other.value
    }
}

impl MetadataEntry {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        MetadataEntry {
            key: key.into(),
            value: value.into(),
            loc: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyKind {
    Cmp(String),
    Fmp(OMObject),
}

#[derive(Debug, Clone)]
pub struct PropertyItem {
    pub kind: PropertyKind,
    pub loc: Option<SourceLoc>,
}

impl PartialEq for PropertyItem {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExampleSegment {
    Text(String),
    Object(OMObject),
}

#[derive(Debug, Clone)]
pub struct ExampleItem {
    pub segments: Vec<ExampleSegment>,
    pub loc: Option<SourceLoc>,
}

impl PartialEq for ExampleItem {
    fn eq(&self, other: &Self) -> bool {
        self.segments == other.segments
    }
}

impl ExampleItem {
    pub fn objects(&self) -> impl Iterator<Item = &OMObject> {
        self.segments.iter().filter_map(|s| match s {
            ExampleSegment::Object(o) => Some(o),
            ExampleSegment::Text(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolItem {
    Property(PropertyItem),
    Example(ExampleItem),
}

impl SymbolItem {
    pub fn loc(&self) -> Option<SourceLoc> {
        match self {
            SymbolItem::Property(p) => p.loc,
            SymbolItem::Example(e) => e.loc,
        }
    }

    pub fn span(&self) -> Option<Span> {
        self.loc().map(|l| l.span)
    }

    pub fn is_cmp(&self) -> bool {
        matches!(self, SymbolItem::Property(PropertyItem { kind: PropertyKind::Cmp(_), .. }))
    }

    pub fn is_fmp(&self) -> bool {
        matches!(self, SymbolItem::Property(PropertyItem { kind: PropertyKind::Fmp(_), .. }))
    }

    /// OpenMath objects held by the item: the FMP object or the example's
    /// embedded objects.
    pub fn objects(&self) -> Vec<&OMObject> {
        match self {
            SymbolItem::Property(PropertyItem { kind: PropertyKind::Fmp(o), .. }) => vec![o],
            SymbolItem::Property(_) => vec![],
            SymbolItem::Example(e) => e.objects().collect(),
        }
    }
}

/// Source layout of a `CDDefinition` element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DefLayout {
    pub lead: Span,
    pub open: Span,
    pub name: SourceLoc,
    pub role: Option<SourceLoc>,
    pub description: Option<SourceLoc>,
    /// Trivia after the last child plus the end tag.
    pub tail: Span,
}

#[derive(Debug, Clone)]
pub struct SymbolDef {
    pub name: String,
    pub role: Option<Role>,
    pub description: String,
    pub items: Vec<SymbolItem>,
    pub span: Option<Span>,
    pub layout: Option<DefLayout>,
}

impl PartialEq for SymbolDef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.role == other.role
            && self.description == other.description
            && self.items == other.items
    }
}

impl SymbolDef {
    pub fn new(name: impl Into<String>, role: Option<Role>, description: impl Into<String>) -> Self {
        SymbolDef {
            name: name.into(),
            role,
            description: description.into(),
            items: Vec::new(),
            span: None,
            layout: None,
        }
    }

    /// Every OpenMath object in FMPs and examples, in document order.
    pub fn objects(&self) -> impl Iterator<Item = &OMObject> {
        self.items.iter().flat_map(SymbolItem::objects)
    }
}

#[derive(Debug, Clone)]
pub struct ContentDictionary {
    pub metadata: Vec<MetadataEntry>,
    pub symbols: Vec<SymbolDef>,
    /// The text this model was parsed from; empty for models built in code.
    pub source: String,
    /// Prolog and `<CD>` start tag.
    pub head: Option<Span>,
    /// Trivia after the last child, the end tag, and anything after it.
    pub tail: Option<Span>,
}

impl PartialEq for ContentDictionary {
    fn eq(&self, other: &Self) -> bool {
        self.metadata == other.metadata && self.symbols == other.symbols
    }
}

impl ContentDictionary {
    /// A fresh CD with only a `CDName`.
    pub fn new(name: &str) -> Self {
        ContentDictionary {
            metadata: vec![MetadataEntry::new("CDName", name)],
            symbols: Vec::new(),
            source: String::new(),
            head: None,
            tail: None,
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|m| m.key == key)
            .map(|m| m.value.as_str())
    }

    /// `CDName`, trimmed.
    pub fn name(&self) -> &str {
        self.meta("CDName").map(str::trim).unwrap_or("")
    }

    pub fn symbol(&self, name: &str) -> Option<&SymbolDef> {
        self.symbols.iter().find(|s| s.name == name)
    }

    pub fn symbol_mut(&mut self, name: &str) -> Option<&mut SymbolDef> {
        self.symbols.iter_mut().find(|s| s.name == name)
    }

    /// Check that `CDName` matches the repository file stem (`arith1` for
    /// `arith1.ocd`).
    pub fn check_file_stem(&self, stem: &str) -> Result<(), OmError> {
        if self.name() != stem {
            return Err(OmError::Schema {
                path: "CD/CDName".into(),
                reason: format!("CDName '{}' does not match file name '{stem}'", self.name()),
                line: 1,
                column: 1,
            });
        }
        Ok(())
    }
}

pub fn parse_cd(src: &str) -> Result<ContentDictionary, OmError> {
    parse_cd_with(src, ParseOptions::default())
}

pub fn parse_cd_with(src: &str, opts: ParseOptions) -> Result<ContentDictionary, OmError> {
    let doc = xml::parse_document(src)?;
    let root = &doc.root;
    if root.local_name() != "CD" {
        return Err(OmError::schema(
            src,
            root.span.start,
            root.local_name(),
            "root element must be <CD>",
        ));
    }
    if root.is_self_closing() {
        return Err(OmError::schema(src, root.span.start, "CD", "CD has no CDName"));
    }

    let mut metadata = Vec::new();
    let mut symbols: Vec<SymbolDef> = Vec::new();
    let mut prev_end = root.open_span.end;
    for node in &root.children {
        let el = match node {
            Node::Element(el) if el.local_name() == "CDComment" => continue,
            Node::Element(el) => el,
            Node::Text(t) if !node.is_trivia() => {
                return Err(OmError::schema(src, t.span.start, "CD", "unexpected text content"));
            }
            _ => continue,
        };
        let lead = Span::new(prev_end, el.span.start);
        prev_end = el.span.end;
        let name = el.local_name();
        if name == "CDDefinition" {
            let path = format!("CD/CDDefinition[{}]", symbols.len() + 1);
            let def = parse_def(src, el, lead, &path, opts)?;
            if symbols.iter().any(|s| s.name == def.name) {
                return Err(OmError::DuplicateSymbol(def.name));
            }
            symbols.push(def);
        } else if METADATA_KEYS.contains(&name) {
            if !symbols.is_empty() {
                return Err(OmError::schema(
                    src,
                    el.span.start,
                    &format!("CD/{name}"),
                    "metadata must precede the first CDDefinition",
                ));
            }
            metadata.push(MetadataEntry {
                key: name.to_string(),
                value: deep_text(el),
                loc: Some(SourceLoc {
                    span: el.span,
                    lead,
                }),
            });
        } else {
            return Err(OmError::schema(
                src,
                el.span.start,
                &format!("CD/{name}"),
                format!("unknown element <{name}>"),
            ));
        }
    }

    let cd = ContentDictionary {
        metadata,
        symbols,
        source: src.to_string(),
        head: Some(Span::new(0, root.open_span.end)),
        tail: Some(Span::new(prev_end, src.len())),
    };
    if cd.meta("CDName").is_none() {
        return Err(OmError::schema(src, root.span.start, "CD", "CD has no CDName"));
    }
    if !is_ncname(cd.name()) {
        return Err(OmError::schema(
            src,
            root.span.start,
            "CD/CDName",
            format!("'{}' is not a valid CD name", cd.name()),
        ));
    }
    Ok(cd)
}

/// Parse a standalone `CDDefinition` element. Spans are relative to `src`.
pub fn parse_symbol_def(src: &str) -> Result<SymbolDef, OmError> {
    let doc = xml::parse_document(src)?;
    if doc.root.local_name() != "CDDefinition" {
        return Err(OmError::schema(
            src,
            doc.root.span.start,
            doc.root.local_name(),
            "expected <CDDefinition>",
        ));
    }
    parse_def(
        src,
        &doc.root,
        Span::new(doc.root.span.start, doc.root.span.start),
        "CDDefinition",
        ParseOptions::default(),
    )
}

fn deep_text(el: &Element) -> String {
    let mut out = String::new();
    for n in &el.children {
        match n {
            Node::Text(t) => out.push_str(&t.text),
            Node::Element(e) => out.push_str(&deep_text(e)),
            _ => {}
        }
    }
    out
}

fn text_only(src: &str, el: &Element, path: &str) -> Result<String, OmError> {
    if let Some(child) = el.child_elements().next() {
        return Err(OmError::schema(
            src,
            child.span.start,
            path,
            format!("<{}> may only contain text", el.local_name()),
        ));
    }
    Ok(el.text())
}

pub(crate) fn parse_def(
    src: &str,
    el: &Element,
    lead: Span,
    path: &str,
    opts: ParseOptions,
) -> Result<SymbolDef, OmError> {
    // 0: expecting Name, 1: Role, 2: Description, 3: items
    let mut stage = 0;
    let mut name: Option<(String, SourceLoc)> = None;
    let mut role = None;
    let mut description = None;
    let mut items = Vec::new();
    let mut prev_end = el.open_span.end;

    for node in &el.children {
        let child = match node {
            Node::Element(c) if c.local_name() == "CDComment" => continue,
            Node::Element(c) => c,
            Node::Text(t) if !node.is_trivia() => {
                return Err(OmError::schema(src, t.span.start, path, "unexpected text content"));
            }
            _ => continue,
        };
        let loc = SourceLoc {
            span: child.span,
            lead: Span::new(prev_end, child.span.start),
        };
        prev_end = child.span.end;
        let kind = child.local_name();
        let child_path = format!("{path}/{kind}");
        let order_err = || {
            OmError::schema(
                src,
                child.span.start,
                &child_path,
                format!("<{kind}> is out of order in CDDefinition"),
            )
        };
        match kind {
            "Name" => {
                if stage != 0 {
                    return Err(order_err());
                }
                stage = 1;
                let n = text_only(src, child, &child_path)?.trim().to_string();
                if !is_ncname(&n) {
                    return Err(OmError::schema(
                        src,
                        child.span.start,
                        &child_path,
                        format!("'{n}' is not a valid symbol name"),
                    ));
                }
                name = Some((n, loc));
            }
            "Role" => {
                if stage != 1 {
                    return Err(order_err());
                }
                stage = 2;
                let r = Role::parse(text_only(src, child, &child_path)?.trim());
                if let (Role::Other(v), RolePolicy::Reject) = (&r, opts.unknown_role) {
                    return Err(OmError::schema(
                        src,
                        child.span.start,
                        &child_path,
                        format!("unknown role '{v}'"),
                    ));
                }
                role = Some((r, loc));
            }
            "Description" => {
                if stage == 0 || stage > 2 {
                    return Err(order_err());
                }
                stage = 3;
                description = Some((text_only(src, child, &child_path)?, loc));
            }
            "CMP" | "FMP" | "Example" => {
                if stage == 0 {
                    return Err(order_err());
                }
                stage = 3;
                items.push(parse_item(src, child, loc, &child_path)?);
            }
            other => {
                return Err(OmError::schema(
                    src,
                    child.span.start,
                    &child_path,
                    format!("unknown element <{other}> in CDDefinition"),
                ));
            }
        }
    }

    let (name, name_loc) = name
        .ok_or_else(|| OmError::schema(src, el.span.start, path, "CDDefinition without Name"))?;
    Ok(SymbolDef {
        name,
        role: role.as_ref().map(|(r, _)| r.clone()),
        description: description.as_ref().map(|(d, _)| d.clone()).unwrap_or_default(),
        items,
        span: Some(el.span),
        layout: Some(DefLayout {
            lead,
            open: el.open_span,
            name: name_loc,
            role: role.map(|(_, l)| l),
            description: description.map(|(_, l)| l),
            tail: Span::new(prev_end, el.span.end),
        }),
    })
}

/// Parse one `CMP`, `FMP` or `Example` element.
pub(crate) fn parse_item(
    src: &str,
    el: &Element,
    loc: SourceLoc,
    path: &str,
) -> Result<SymbolItem, OmError> {
    match el.local_name() {
        "CMP" => Ok(SymbolItem::Property(PropertyItem {
            kind: PropertyKind::Cmp(text_only(src, el, path)?),
            loc: Some(loc),
        })),
        "FMP" => {
            let objs: Vec<&Element> = el.child_elements().collect();
            if objs.len() != 1 || objs[0].local_name() != "OMOBJ" {
                return Err(OmError::schema(
                    src,
                    el.span.start,
                    path,
                    "FMP must contain exactly one OMOBJ",
                ));
            }
            if el.children.iter().any(|n| matches!(n, Node::Text(_)) && !n.is_trivia()) {
                return Err(OmError::schema(src, el.span.start, path, "unexpected text in FMP"));
            }
            let obj = from_omobj(src, objs[0], &format!("{path}/OMOBJ"))?;
            Ok(SymbolItem::Property(PropertyItem {
                kind: PropertyKind::Fmp(obj),
                loc: Some(loc),
            }))
        }
        "Example" => {
            let mut segments = Vec::new();
            for n in &el.children {
                match n {
                    Node::Text(t) if !n.is_trivia() => segments.push(ExampleSegment::Text(t.text.clone())),
                    Node::Element(o) if o.local_name() == "OMOBJ" => {
                        segments.push(ExampleSegment::Object(from_omobj(
                            src,
                            o,
                            &format!("{path}/OMOBJ"),
                        )?));
                    }
                    Node::Element(o) => {
                        return Err(OmError::schema(
                            src,
                            o.span.start,
                            path,
                            format!("unknown element <{}> in Example", o.local_name()),
                        ));
                    }
                    _ => {}
                }
            }
            if segments.is_empty() {
                return Err(OmError::schema(src, el.span.start, path, "empty Example"));
            }
            Ok(SymbolItem::Example(ExampleItem {
                segments,
                loc: Some(loc),
            }))
        }
        other => Err(OmError::schema(
            src,
            el.span.start,
            path,
            format!("<{other}> is not a property or example"),
        )),
    }
}

fn pad(n: usize) -> String {
    " ".repeat(n)
}

fn text_element(name: &str, text: &str) -> String {
    format!("<{name}>{}</{name}>", escape_text(text))
}

/// Canonical encoding of a property or example item. The first line is not
/// indented; continuation lines are indented relative to `indent`.
pub fn canonical_item(item: &SymbolItem, indent: usize) -> String {
    match item {
        SymbolItem::Property(PropertyItem { kind: PropertyKind::Cmp(t), .. }) => text_element("CMP", t),
        SymbolItem::Property(PropertyItem { kind: PropertyKind::Fmp(o), .. }) => format!(
            "<FMP>\n{}{}\n{}</FMP>",
            pad(indent + 1),
            o.to_xml_indented(indent + 1),
            pad(indent)
        ),
        SymbolItem::Example(ex) => {
            let mut out = String::from("<Example>");
            for seg in &ex.segments {
                out.push('\n');
                out.push_str(&pad(indent + 1));
                match seg {
                    ExampleSegment::Text(t) => out.push_str(&escape_text(t.trim())),
                    ExampleSegment::Object(o) => out.push_str(&o.to_xml_indented(indent + 1)),
                }
            }
            out.push('\n');
            out.push_str(&pad(indent));
            out.push_str("</Example>");
            out
        }
    }
}

/// Canonical encoding of a whole `CDDefinition`.
pub fn canonical_def(def: &SymbolDef, indent: usize) -> String {
    let inner = pad(indent + 1);
    let mut out = String::from("<CDDefinition>\n");
    out.push_str(&inner);
    out.push_str(&text_element("Name", &def.name));
    if let Some(role) = &def.role {
        out.push('\n');
        out.push_str(&inner);
        out.push_str(&text_element("Role", role.as_str()));
    }
    out.push('\n');
    out.push_str(&inner);
    out.push_str(&text_element("Description", &def.description));
    for item in &def.items {
        out.push('\n');
        out.push_str(&inner);
        out.push_str(&canonical_item(item, indent + 1));
    }
    out.push('\n');
    out.push_str(&pad(indent));
    out.push_str("</CDDefinition>");
    out
}

fn canonical_metadata(m: &MetadataEntry) -> String {
    text_element(&m.key, &m.value)
}

fn canonical_cd(cd: &ContentDictionary) -> String {
    let mut out = format!("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<CD xmlns=\"{CD_NS}\">\n");
    for m in &cd.metadata {
        out.push_str(&canonical_metadata(m));
        out.push('\n');
    }
    for s in &cd.symbols {
        out.push('\n');
        out.push_str(&canonical_def(s, 0));
        out.push('\n');
    }
    out.push_str("\n</CD>\n");
    out
}

struct Originals<'a> {
    metadata: HashMap<usize, &'a MetadataEntry>,
    defs: HashMap<usize, &'a SymbolDef>,
}

/// Write a CD back to text. Parts whose content is unchanged since parsing are
/// copied from the source; edited or new parts use the canonical encoding.
pub fn serialize_cd(cd: &ContentDictionary) -> String {
    let (Some(head), Some(tail)) = (cd.head, cd.tail) else {
        return canonical_cd(cd);
    };
    let src = cd.source.as_str();
    let Ok(original) = parse_cd(src) else {
        return canonical_cd(cd);
    };
    let orig = Originals {
        metadata: original
            .metadata
            .iter()
            .filter_map(|m| m.loc.map(|l| (l.span.start, m)))
            .collect(),
        defs: original
            .symbols
            .iter()
            .filter_map(|s| s.span.map(|sp| (sp.start, s)))
            .collect(),
    };

    let mut out = String::with_capacity(src.len());
    out.push_str(head.slice(src));
    for m in &cd.metadata {
        match m.loc {
            Some(loc) => {
                out.push_str(loc.lead.slice(src));
                if orig.metadata.get(&loc.span.start) == Some(&m) {
                    out.push_str(loc.span.slice(src));
                } else {
                    out.push_str(&canonical_metadata(m));
                }
            }
            None => {
                out.push('\n');
                out.push_str(&canonical_metadata(m));
            }
        }
    }
    for def in &cd.symbols {
        write_def(&mut out, src, def, &orig);
    }
    out.push_str(tail.slice(src));
    out
}

fn write_def(out: &mut String, src: &str, def: &SymbolDef, orig: &Originals<'_>) {
    let (Some(span), Some(layout)) = (def.span, def.layout) else {
        out.push('\n');
        out.push_str(&canonical_def(def, 0));
        return;
    };
    let Some(original) = orig.defs.get(&span.start) else {
        out.push_str(layout.lead.slice(src));
        out.push_str(&canonical_def(def, 0));
        return;
    };
    out.push_str(layout.lead.slice(src));
    if *original == def {
        out.push_str(span.slice(src));
        return;
    }

    out.push_str(layout.open.slice(src));
    out.push_str(layout.name.lead.slice(src));
    if original.name == def.name {
        out.push_str(layout.name.span.slice(src));
    } else {
        out.push_str(&text_element("Name", &def.name));
    }

    match (layout.role, &def.role) {
        (Some(loc), Some(role)) => {
            out.push_str(loc.lead.slice(src));
            if original.role.as_ref() == Some(role) {
                out.push_str(loc.span.slice(src));
            } else {
                out.push_str(&text_element("Role", role.as_str()));
            }
        }
        (None, Some(role)) => {
            out.push('\n');
            out.push_str(&text_element("Role", role.as_str()));
        }
        (_, None) => {}
    }

    match layout.description {
        Some(loc) => {
            out.push_str(loc.lead.slice(src));
            if original.description == def.description {
                out.push_str(loc.span.slice(src));
            } else {
                out.push_str(&text_element("Description", &def.description));
            }
        }
        None if !def.description.is_empty() => {
            out.push('\n');
            out.push_str(&text_element("Description", &def.description));
        }
        None => {}
    }

    let orig_items: HashMap<usize, &SymbolItem> = original
        .items
        .iter()
        .filter_map(|i| i.span().map(|s| (s.start, i)))
        .collect();
    for item in &def.items {
        match item.loc() {
            Some(loc) => {
                out.push_str(loc.lead.slice(src));
                if orig_items.get(&loc.span.start) == Some(&item) {
                    out.push_str(loc.span.slice(src));
                } else {
                    out.push_str(&canonical_item(item, 0));
                }
            }
            None => {
                out.push('\n');
                out.push_str(&canonical_item(item, 0));
            }
        }
    }
    out.push_str(layout.tail.slice(src));
}

/// Names of all symbols defined in a set of CDs, keyed by CD name.
pub fn symbol_index<'a>(
    cds: impl IntoIterator<Item = &'a ContentDictionary>,
) -> HashMap<String, HashSet<String>> {
    let mut index: HashMap<String, HashSet<String>> = HashMap::new();
    for cd in cds {
        index
            .entry(cd.name().to_string())
            .or_default()
            .extend(cd.symbols.iter().map(|s| s.name.clone()));
    }
    index
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLUS_CD: &str = r#"<CD xmlns="http://www.openmath.org/OpenMathCD">
<CDName>arith1</CDName>
<Description>tiny</Description>

<CDDefinition>
<Name>plus</Name>
<Role>application</Role>
<Description>The symbol representing an n-ary commutative
 function plus.</Description>
<CMP>for all a,b | a + b = b + a </CMP>
<FMP>
<OMOBJ xmlns="http://www.openmath.org/OpenMath">
  <OMBIND>
    <OMS cd="quant1" name="forall"/>
    <OMBVAR><OMV name="a"/><OMV name="b"/></OMBVAR>
    <OMA>
      <OMS cd="relation1" name="eq"/>
      <OMA><OMS cd="arith1" name="plus"/><OMV name="a"/><OMV name="b"/></OMA>
      <OMA><OMS cd="arith1" name="plus"/><OMV name="b"/><OMV name="a"/></OMA>
    </OMA>
  </OMBIND>
</OMOBJ>
</FMP>
</CDDefinition>
</CD>
"#;

    #[test]
    fn parses_plus_definition() {
        let cd = parse_cd(PLUS_CD).unwrap();
        assert_eq!(cd.name(), "arith1");
        let plus = &cd.symbols[0];
        assert_eq!(plus.name, "plus");
        assert_eq!(plus.role, Some(Role::Application));
        assert!(plus.description.starts_with("The symbol representing an n-ary commutative"));
        assert_eq!(plus.items.len(), 2);
        assert!(plus.items[0].is_cmp() && plus.items[1].is_fmp());
    }

    #[test]
    fn metadata_only_cd() {
        let src = "<CD><CDName>empty1</CDName><Description>x</Description></CD>";
        let cd = parse_cd(src).unwrap();
        assert!(cd.symbols.is_empty());
        assert_eq!(serialize_cd(&cd), src);
    }

    #[test]
    fn unmodified_model_round_trips() {
        let cd = parse_cd(PLUS_CD).unwrap();
        assert_eq!(serialize_cd(&cd), PLUS_CD);
    }

    #[test]
    fn spans_reparse_to_equal_definitions() {
        let cd = parse_cd(PLUS_CD).unwrap();
        let s = &cd.symbols[0];
        let again = parse_symbol_def(s.span.unwrap().slice(PLUS_CD)).unwrap();
        assert_eq!(&again, s);
    }

    #[test]
    fn edited_description_is_the_only_change() {
        let mut cd = parse_cd(PLUS_CD).unwrap();
        cd.symbols[0].description = "Fixed text.".into();
        let out = serialize_cd(&cd);
        assert_eq!(
            out,
            PLUS_CD.replace(
                "<Description>The symbol representing an n-ary commutative\n function plus.</Description>",
                "<Description>Fixed text.</Description>"
            )
        );
        assert_eq!(parse_cd(&out).unwrap().symbols[0].description, "Fixed text.");
    }

    #[test]
    fn new_symbol_and_removed_role_reparse() {
        let mut cd = parse_cd(PLUS_CD).unwrap();
        cd.symbols[0].role = None;
        let mut times = SymbolDef::new("times", Some(Role::Application), "Multiplication.");
        times.items.push(SymbolItem::Property(PropertyItem {
            kind: PropertyKind::Fmp(OMObject::sym("arith1", "times")),
            loc: None,
        }));
        cd.symbols.push(times);
        let out = serialize_cd(&cd);
        let again = parse_cd(&out).unwrap();
        assert_eq!(again, cd);
    }

    #[test]
    fn built_in_code_serializes_canonically() {
        let mut cd = ContentDictionary::new("fresh1");
        cd.metadata.push(MetadataEntry::new("Description", "a & b"));
        let out = serialize_cd(&cd);
        assert!(out.contains("<Description>a &amp; b</Description>"));
        let again = parse_cd(&out).unwrap();
        assert_eq!(again, cd);
        assert!(again.symbols.is_empty());
    }

    #[test]
    fn schema_errors() {
        let missing_name = "<CD><CDName>x</CDName><CDDefinition><Description>d</Description></CDDefinition></CD>";
        assert!(matches!(parse_cd(missing_name).unwrap_err(), OmError::Schema { .. }));
        let unknown = "<CD><CDName>x</CDName><Bogus/></CD>";
        let err = parse_cd(unknown).unwrap_err();
        assert!(matches!(&err, OmError::Schema { reason, .. } if reason.contains("Bogus")));
        let no_cdname = "<CD><Description>d</Description></CD>";
        assert!(parse_cd(no_cdname).is_err());
        let dup = "<CD><CDName>x</CDName><CDDefinition><Name>a</Name></CDDefinition><CDDefinition><Name>a</Name></CDDefinition></CD>";
        assert_eq!(parse_cd(dup).unwrap_err(), OmError::DuplicateSymbol("a".into()));
        assert!(matches!(parse_cd("<CD><CDName>x</CD>").unwrap_err(), OmError::Xml(_)));
    }

    #[test]
    fn unknown_roles_follow_policy() {
        let src = "<CD><CDName>x</CDName><CDDefinition><Name>a</Name><Role>weird</Role><Description>d</Description></CDDefinition></CD>";
        let cd = parse_cd(src).unwrap();
        assert_eq!(cd.symbols[0].role, Some(Role::Other("weird".into())));
        let strict = ParseOptions {
            unknown_role: RolePolicy::Reject,
        };
        assert!(parse_cd_with(src, strict).is_err());
    }

    #[test]
    fn file_stem_check() {
        let cd = parse_cd(PLUS_CD).unwrap();
        assert!(cd.check_file_stem("arith1").is_ok());
        assert!(cd.check_file_stem("arith2").is_err());
    }
}
