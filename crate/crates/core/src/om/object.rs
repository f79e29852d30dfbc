//! OpenMath objects and their XML encoding.

use std::fmt::Write as _;

use base64::Engine as _;
use num_bigint::BigInt;

use super::error::OmError;
use super::names::is_ncname;
use crate::xml::{self, escape_text, start_tag, Element, Node};

/// Namespace of the OpenMath 2 XML object encoding.
pub const OM_NS: &str = "http://www.openmath.org/OpenMath";

/// A symbol reference `cd#name`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub cd: String,
    pub name: String,
    pub cdbase: Option<String>,
}

impl Symbol {
    pub fn new(cd: impl Into<String>, name: impl Into<String>) -> Self {
        Symbol {
            cd: cd.into(),
            name: name.into(),
            cdbase: None,
        }
    }

    /// The `(cd, name)` pair used as a lookup key everywhere.
    pub fn key(&self) -> SymbolKey {
        SymbolKey::new(&self.cd, &self.name)
    }
}

/// `(cd, name)` without the cdbase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct SymbolKey {
    pub cd: String,
    pub name: String,
}

impl SymbolKey {
    pub fn new(cd: impl Into<String>, name: impl Into<String>) -> Self {
        SymbolKey {
            cd: cd.into(),
            name: name.into(),
        }
    }
}

impl std::fmt::Display for SymbolKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}#{}", self.cd, self.name)
    }
}

#[derive(Debug, Clone)]
pub enum OMObject {
    Integer(BigInt),
    Float(f64),
    Str(String),
    Bytes(Vec<u8>),
    Variable(String),
    Symbol(Symbol),
    /// The first element is the head.
    Application(Vec<OMObject>),
    Binding {
        binder: Box<OMObject>,
        bvars: Vec<String>,
        body: Box<OMObject>,
    },
}

// Floats compare by bit pattern so that NaN payloads and signed zeros survive
// round-trip checks.
impl PartialEq for OMObject {
    fn eq(&self, other: &Self) -> bool {
        use OMObject::*;
        match (self, other) {
            (Integer(a), Integer(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Str(a), Str(b)) => a == b,
            (Bytes(a), Bytes(b)) => a == b,
            (Variable(a), Variable(b)) => a == b,
            (Symbol(a), Symbol(b)) => a == b,
            (Application(a), Application(b)) => a == b,
            (
                Binding {
                    binder: b1,
                    bvars: v1,
                    body: d1,
                },
                Binding {
                    binder: b2,
                    bvars: v2,
                    body: d2,
                },
            ) => b1 == b2 && v1 == v2 && d1 == d2,
            _ => false,
        }
    }
}

impl Eq for OMObject {}

impl OMObject {
    pub fn int(v: i64) -> Self {
        OMObject::Integer(BigInt::from(v))
    }

    pub fn var(name: impl Into<String>) -> Self {
        OMObject::Variable(name.into())
    }

    pub fn sym(cd: impl Into<String>, name: impl Into<String>) -> Self {
        OMObject::Symbol(Symbol::new(cd, name))
    }

    pub fn app(elements: Vec<OMObject>) -> Self {
        OMObject::Application(elements)
    }

    pub fn bind(binder: OMObject, bvars: &[&str], body: OMObject) -> Self {
        OMObject::Binding {
            binder: Box::new(binder),
            bvars: bvars.iter().map(|s| s.to_string()).collect(),
            body: Box::new(body),
        }
    }

    /// Node count of the object tree (bound variable declarations excluded).
    pub fn size(&self) -> usize {
        1 + self.children().map(OMObject::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().map(OMObject::depth).max().unwrap_or(0)
    }

    /// Direct sub-objects in document order.
    pub fn children(&self) -> Box<dyn Iterator<Item = &OMObject> + '_> {
        match self {
            OMObject::Application(els) => Box::new(els.iter()),
            OMObject::Binding { binder, body, .. } => {
                Box::new(std::iter::once(&**binder).chain(std::iter::once(&**body)))
            }
            _ => Box::new(std::iter::empty()),
        }
    }

    /// Every node in pre-order. Positions in this list are the content ids used
    /// by parallel markup.
    pub fn preorder(&self) -> Vec<&OMObject> {
        let mut out = Vec::with_capacity(self.size());
        fn walk<'a>(o: &'a OMObject, out: &mut Vec<&'a OMObject>) {
            out.push(o);
            for c in o.children() {
                walk(c, out);
            }
        }
        walk(self, &mut out);
        out
    }

    /// All symbol occurrences, in pre-order, duplicates included.
    pub fn symbols(&self) -> Vec<&Symbol> {
        self.preorder()
            .into_iter()
            .filter_map(|o| match o {
                OMObject::Symbol(s) => Some(s),
                _ => None,
            })
            .collect()
    }

    /// Check the structural invariants of the data model.
    pub fn validate(&self) -> Result<(), OmError> {
        match self {
            OMObject::Application(els) if els.is_empty() => Err(OmError::EmptyApplication {
                path: "OMA".into(),
            }),
            OMObject::Symbol(s) if !is_ncname(&s.cd) || !is_ncname(&s.name) => {
                Err(OmError::InvalidName(format!("{}#{}", s.cd, s.name)))
            }
            OMObject::Variable(v) if !is_ncname(v) => Err(OmError::InvalidName(v.clone())),
            OMObject::Binding { bvars, .. } => {
                let mut seen = std::collections::HashSet::new();
                for v in bvars {
                    if !is_ncname(v) {
                        return Err(OmError::InvalidName(v.clone()));
                    }
                    if !seen.insert(v) {
                        return Err(OmError::DuplicateBoundVariable(v.clone()));
                    }
                }
                self.children().try_for_each(OMObject::validate)
            }
            _ => self.children().try_for_each(OMObject::validate),
        }
    }

    /// Canonical XML encoding wrapped in `OMOBJ`: alphabetical attributes and a
    /// one-space indent per nesting level.
    pub fn to_xml(&self) -> String {
        let mut out = String::new();
        write_omobj(&mut out, self, 0, None);
        out
    }

    /// Canonical encoding with additional indentation, for embedding.
    pub fn to_xml_indented(&self, indent: usize) -> String {
        let mut out = String::new();
        write_omobj(&mut out, self, indent, None);
        out
    }

    /// Canonical encoding where the n-th pre-order node carries
    /// `id="{prefix}{n}"`.
    pub fn to_xml_with_ids(&self, prefix: &str) -> String {
        let mut out = String::new();
        let mut counter = 0usize;
        write_omobj(&mut out, self, 0, Some((prefix, &mut counter)));
        out
    }
}

fn float_attr(v: f64) -> (&'static str, String) {
    if v.is_finite() {
        ("dec", format!("{v:?}"))
    } else {
        ("hex", format!("{:016X}", v.to_bits()))
    }
}

fn write_omobj(out: &mut String, o: &OMObject, indent: usize, mut ids: Option<(&str, &mut usize)>) {
    out.push_str(&start_tag("OMOBJ", &[("xmlns", OM_NS)], false));
    out.push('\n');
    write_node(out, o, indent + 1, &mut ids);
    out.push('\n');
    pad(out, indent);
    out.push_str("</OMOBJ>");
}

fn pad(out: &mut String, n: usize) {
    for _ in 0..n {
        out.push(' ');
    }
}

fn write_node(out: &mut String, o: &OMObject, indent: usize, ids: &mut Option<(&str, &mut usize)>) {
    let id = ids.as_mut().map(|(prefix, n)| {
        let id = format!("{prefix}{n}");
        **n += 1;
        id
    });
    let mut attrs: Vec<(&str, &str)> = Vec::new();
    if let Some(id) = &id {
        attrs.push(("id", id));
    }
    pad(out, indent);
    match o {
        OMObject::Integer(v) => {
            out.push_str(&start_tag("OMI", &attrs, false));
            let _ = write!(out, "{v}</OMI>");
        }
        OMObject::Float(v) => {
            let (k, val) = float_attr(*v);
            attrs.push((k, &val));
            out.push_str(&start_tag("OMF", &attrs, true));
        }
        OMObject::Str(s) => {
            out.push_str(&start_tag("OMSTR", &attrs, false));
            out.push_str(&escape_text(s));
            out.push_str("</OMSTR>");
        }
        OMObject::Bytes(b) => {
            out.push_str(&start_tag("OMB", &attrs, false));
            out.push_str(&base64::engine::general_purpose::STANDARD.encode(b));
            out.push_str("</OMB>");
        }
        OMObject::Variable(name) => {
            attrs.push(("name", name));
            out.push_str(&start_tag("OMV", &attrs, true));
        }
        OMObject::Symbol(s) => {
            attrs.push(("cd", &s.cd));
            attrs.push(("name", &s.name));
            if let Some(base) = &s.cdbase {
                attrs.push(("cdbase", base));
            }
            out.push_str(&start_tag("OMS", &attrs, true));
        }
        OMObject::Application(els) => {
            out.push_str(&start_tag("OMA", &attrs, false));
            for e in els {
                out.push('\n');
                write_node(out, e, indent + 1, ids);
            }
            out.push('\n');
            pad(out, indent);
            out.push_str("</OMA>");
        }
        OMObject::Binding {
            binder,
            bvars,
            body,
        } => {
            out.push_str(&start_tag("OMBIND", &attrs, false));
            out.push('\n');
            write_node(out, binder, indent + 1, ids);
            out.push('\n');
            pad(out, indent + 1);
            out.push_str("<OMBVAR>");
            for v in bvars {
                out.push('\n');
                pad(out, indent + 2);
                out.push_str(&start_tag("OMV", &[("name", v)], true));
            }
            out.push('\n');
            pad(out, indent + 1);
            out.push_str("</OMBVAR>\n");
            write_node(out, body, indent + 1, ids);
            out.push('\n');
            pad(out, indent);
            out.push_str("</OMBIND>");
        }
    }
}

/// Parse an OpenMath object from its XML encoding. The outer `OMOBJ` wrapper
/// is optional.
pub fn parse_om_object(src: &str) -> Result<OMObject, OmError> {
    let doc = xml::parse_document(src)?;
    let root = &doc.root;
    if root.local_name() == "OMOBJ" {
        from_omobj(src, root, "OMOBJ")
    } else {
        from_element(src, root, root.local_name())
    }
}

/// Read the single object inside an `OMOBJ` element.
pub(crate) fn from_omobj(src: &str, el: &Element, path: &str) -> Result<OMObject, OmError> {
    let mut kids = significant_children(src, el, path)?;
    if kids.len() != 1 {
        return Err(OmError::schema(
            src,
            el.span.start,
            path,
            format!("OMOBJ must contain exactly one object, found {}", kids.len()),
        ));
    }
    let child = kids.remove(0);
    from_element(src, child, &format!("{path}/{}", child.local_name()))
}

fn significant_children<'e>(
    src: &str,
    el: &'e Element,
    path: &str,
) -> Result<Vec<&'e Element>, OmError> {
    let mut out = Vec::new();
    for node in &el.children {
        match node {
            Node::Element(e) => out.push(e),
            Node::Text(t) if !node.is_trivia() => {
                return Err(OmError::schema(
                    src,
                    t.span.start,
                    path,
                    "unexpected text content",
                ));
            }
            _ => {}
        }
    }
    Ok(out)
}

fn required_attr<'e>(src: &str, el: &'e Element, name: &str, path: &str) -> Result<&'e str, OmError> {
    el.attr(name).ok_or_else(|| {
        OmError::schema(
            src,
            el.span.start,
            path,
            format!("<{}> is missing attribute '{name}'", el.local_name()),
        )
    })
}

fn ncname_attr(src: &str, el: &Element, name: &str, path: &str) -> Result<String, OmError> {
    let v = required_attr(src, el, name, path)?.trim();
    if !is_ncname(v) {
        return Err(OmError::schema(
            src,
            el.span.start,
            path,
            format!("'{v}' is not a valid name"),
        ));
    }
    Ok(v.to_string())
}

fn parse_float(src: &str, el: &Element, path: &str) -> Result<f64, OmError> {
    if let Some(dec) = el.attr("dec") {
        let t = dec.trim();
        let v = match t {
            "INF" => Some(f64::INFINITY),
            "-INF" => Some(f64::NEG_INFINITY),
            "NaN" => Some(f64::NAN),
            _ => t.parse::<f64>().ok(),
        };
        v.ok_or_else(|| OmError::schema(src, el.span.start, path, format!("bad OMF dec value '{t}'")))
    } else if let Some(hex) = el.attr("hex") {
        let t = hex.trim();
        if t.len() != 16 {
            return Err(OmError::schema(src, el.span.start, path, "OMF hex value must have 16 digits"));
        }
        u64::from_str_radix(t, 16)
            .map(f64::from_bits)
            .map_err(|_| OmError::schema(src, el.span.start, path, format!("bad OMF hex value '{t}'")))
    } else {
        Err(OmError::schema(src, el.span.start, path, "OMF needs a 'dec' or 'hex' attribute"))
    }
}

fn parse_integer(src: &str, el: &Element, path: &str) -> Result<BigInt, OmError> {
    let text: String = el.text().chars().filter(|c| !c.is_whitespace()).collect();
    let (neg, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let value = match digits.strip_prefix('x') {
        Some(hex) => BigInt::parse_bytes(hex.as_bytes(), 16),
        None => BigInt::parse_bytes(digits.as_bytes(), 10),
    };
    // parse_bytes accepts a sign itself; we only allow ours.
    let value = value.filter(|_| !digits.starts_with(['+', '-']));
    let value =
        value.ok_or_else(|| OmError::schema(src, el.span.start, path, format!("bad OMI content '{text}'")))?;
    Ok(if neg { -value } else { value })
}

pub(crate) fn from_element(src: &str, el: &Element, path: &str) -> Result<OMObject, OmError> {
    match el.local_name() {
        "OMI" => parse_integer(src, el, path).map(OMObject::Integer),
        "OMF" => parse_float(src, el, path).map(OMObject::Float),
        "OMSTR" => Ok(OMObject::Str(el.text())),
        "OMB" => {
            let text: String = el.text().chars().filter(|c| !c.is_whitespace()).collect();
            base64::engine::general_purpose::STANDARD
                .decode(text.as_bytes())
                .map(OMObject::Bytes)
                .map_err(|e| OmError::schema(src, el.span.start, path, format!("bad OMB content: {e}")))
        }
        "OMV" => ncname_attr(src, el, "name", path).map(OMObject::Variable),
        "OMS" => {
            let cd = ncname_attr(src, el, "cd", path)?;
            let name = ncname_attr(src, el, "name", path)?;
            Ok(OMObject::Symbol(Symbol {
                cd,
                name,
                cdbase: el.attr("cdbase").map(str::to_string),
            }))
        }
        "OMA" => {
            let kids = significant_children(src, el, path)?;
            if kids.is_empty() {
                return Err(OmError::EmptyApplication {
                    path: path.to_string(),
                });
            }
            kids.iter()
                .enumerate()
                .map(|(i, k)| from_element(src, k, &format!("{path}/{}[{}]", k.local_name(), i + 1)))
                .collect::<Result<Vec<_>, _>>()
                .map(OMObject::Application)
        }
        "OMBIND" => {
            let kids = significant_children(src, el, path)?;
            if kids.len() != 3 || kids[1].local_name() != "OMBVAR" {
                return Err(OmError::schema(
                    src,
                    el.span.start,
                    path,
                    "OMBIND must contain a binder, an OMBVAR and a body",
                ));
            }
            let binder = from_element(src, kids[0], &format!("{path}/{}", kids[0].local_name()))?;
            let mut bvars = Vec::new();
            for v in significant_children(src, kids[1], path)? {
                if v.local_name() != "OMV" {
                    if matches!(v.local_name(), "OMATTR") {
                        return Err(OmError::UnsupportedKind("OMATTR".into()));
                    }
                    return Err(OmError::schema(
                        src,
                        v.span.start,
                        path,
                        "OMBVAR may only contain OMV elements",
                    ));
                }
                let name = ncname_attr(src, v, "name", path)?;
                if bvars.contains(&name) {
                    return Err(OmError::DuplicateBoundVariable(name));
                }
                bvars.push(name);
            }
            let body = from_element(src, kids[2], &format!("{path}/{}", kids[2].local_name()))?;
            Ok(OMObject::Binding {
                binder: Box::new(binder),
                bvars,
                body: Box::new(body),
            })
        }
        "OMOBJ" => from_omobj(src, el, path),
        kind @ ("OMATTR" | "OME" | "OMR" | "OMFOREIGN" | "OMATP") => {
            Err(OmError::UnsupportedKind(kind.to_string()))
        }
        other => Err(OmError::schema(
            src,
            el.span.start,
            path,
            format!("unknown OpenMath element <{other}>"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> OMObject {
        let plus = |x: &str, y: &str| {
            OMObject::app(vec![OMObject::sym("arith1", "plus"), OMObject::var(x), OMObject::var(y)])
        };
        OMObject::bind(
            OMObject::sym("quant1", "forall"),
            &["a", "b"],
            OMObject::app(vec![OMObject::sym("relation1", "eq"), plus("a", "b"), plus("b", "a")]),
        )
    }

    #[test]
    fn parses_commutativity_fmp() {
        let src = r#"<OMOBJ xmlns="http://www.openmath.org/OpenMath">
  <OMBIND>
    <OMS cd="quant1" name="forall"/>
    <OMBVAR><OMV name="a"/><OMV name="b"/></OMBVAR>
    <OMA>
      <OMS cd="relation1" name="eq"/>
      <OMA><OMS cd="arith1" name="plus"/><OMV name="a"/><OMV name="b"/></OMA>
      <OMA><OMS cd="arith1" name="plus"/><OMV name="b"/><OMV name="a"/></OMA>
    </OMA>
  </OMBIND>
</OMOBJ>"#;
        assert_eq!(parse_om_object(src).unwrap(), fig1());
    }

    #[test]
    fn atomic_integer() {
        assert_eq!(parse_om_object("<OMOBJ><OMI>5</OMI></OMOBJ>").unwrap(), OMObject::int(5));
        assert_eq!(parse_om_object("<OMI> -x1F </OMI>").unwrap(), OMObject::int(-31));
        assert!(parse_om_object("<OMI>+5</OMI>").is_err());
        assert!(parse_om_object("<OMI>--5</OMI>").is_err());
    }

    #[test]
    fn rejects_attribution_and_errors() {
        let e = parse_om_object("<OMOBJ><OMATTR/></OMOBJ>").unwrap_err();
        assert!(matches!(e, OmError::UnsupportedKind(k) if k == "OMATTR"));
        let e = parse_om_object("<OMOBJ><OME><OMS cd=\"a\" name=\"b\"/></OME></OMOBJ>").unwrap_err();
        assert!(matches!(e, OmError::UnsupportedKind(k) if k == "OME"));
    }

    #[test]
    fn rejects_empty_application_and_duplicate_bvars() {
        assert!(matches!(
            parse_om_object("<OMOBJ><OMA/></OMOBJ>").unwrap_err(),
            OmError::EmptyApplication { .. }
        ));
        let src = r#"<OMBIND><OMS cd="fns1" name="lambda"/><OMBVAR><OMV name="x"/><OMV name="x"/></OMBVAR><OMV name="x"/></OMBIND>"#;
        assert!(matches!(
            parse_om_object(src).unwrap_err(),
            OmError::DuplicateBoundVariable(v) if v == "x"
        ));
    }

    #[test]
    fn floats_in_both_forms() {
        assert_eq!(parse_om_object(r#"<OMF dec="1.5"/>"#).unwrap(), OMObject::Float(1.5));
        let pi = parse_om_object(r#"<OMF hex="400921FB54442D18"/>"#).unwrap();
        assert_eq!(pi, OMObject::Float(std::f64::consts::PI));
        let nan = OMObject::Float(f64::from_bits(0x7FF8_0000_0000_0001));
        assert_eq!(parse_om_object(&nan.to_xml()).unwrap(), nan);
        let negz = OMObject::Float(-0.0);
        assert_eq!(parse_om_object(&negz.to_xml()).unwrap(), negz);
        assert_ne!(negz, OMObject::Float(0.0));
    }

    #[test]
    fn canonical_form_shape() {
        let o = OMObject::app(vec![OMObject::sym("arith1", "plus"), OMObject::var("a"), OMObject::int(2)]);
        assert_eq!(
            o.to_xml(),
            "<OMOBJ xmlns=\"http://www.openmath.org/OpenMath\">\n <OMA>\n  <OMS cd=\"arith1\" name=\"plus\"/>\n  <OMV name=\"a\"/>\n  <OMI>2</OMI>\n </OMA>\n</OMOBJ>"
        );
    }

    #[test]
    fn ids_follow_preorder() {
        let o = fig1();
        let xml = o.to_xml_with_ids("c");
        assert_eq!(xml.matches(" id=\"").count(), o.size());
        assert!(xml.contains(r#"<OMS cd="quant1" id="c1" name="forall"/>"#));
        assert!(xml.contains(r#"<OMA id="c2">"#));
        assert_eq!(parse_om_object(&xml).unwrap(), o);
    }

    #[test]
    fn symbol_listing() {
        let names: Vec<_> = fig1().symbols().iter().map(|s| s.name.clone()).collect();
        assert_eq!(names, ["forall", "eq", "plus", "plus"]);
    }
}
