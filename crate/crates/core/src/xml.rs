//! A small span-preserving XML tree.
//!
//! Every node remembers the byte range it was read from, so callers can cut
//! the original text apart and glue it back together without reformatting
//! anything. Parsing is delegated to `quick-xml`; this module only builds the
//! tree and resolves namespace prefixes.

use std::fmt;

use quick_xml::events::Event;
use quick_xml::Reader;

/// Half-open byte range into a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn slice<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }

    pub fn shift(&self, by: usize) -> Span {
        Span::new(self.start + by, self.end + by)
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// Malformed XML, with the position where the reader gave up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for XmlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for XmlError {}

impl XmlError {
    pub fn at(src: &str, offset: usize, message: impl Into<String>) -> Self {
        let (line, column) = line_col(src, offset);
        XmlError {
            offset,
            line,
            column,
            message: message.into(),
        }
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let mut cut = offset;
    while !src.is_char_boundary(cut) {
        cut -= 1;
    }
    let before = &src[..cut];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = before[line_start..].chars().count() + 1;
    (line, column)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Element(Element),
    Text(Text),
    Comment(Span),
    /// Processing instructions, declarations and doctypes.
    Other(Span),
}

impl Node {
    pub fn span(&self) -> Span {
        match self {
            Node::Element(e) => e.span,
            Node::Text(t) => t.span,
            Node::Comment(s) | Node::Other(s) => *s,
        }
    }

    pub fn as_element(&self) -> Option<&Element> {
        match self {
            Node::Element(e) => Some(e),
            _ => None,
        }
    }

    /// True for text consisting only of XML whitespace, and for comments.
    pub fn is_trivia(&self) -> bool {
        match self {
            Node::Text(t) => t.text.chars().all(|c| matches!(c, ' ' | '\t' | '\r' | '\n')),
            Node::Comment(_) | Node::Other(_) => true,
            Node::Element(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Text {
    /// Text with entity and character references resolved.
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    /// Qualified name as written in the source.
    pub name: String,
    /// Namespace URI the name's prefix (or the default namespace) resolves to.
    pub namespace: Option<String>,
    /// Attributes in source order, values unescaped.
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
    pub span: Span,
    pub open_span: Span,
    /// Equal to `open_span` for self-closing elements.
    pub close_span: Span,
}

impl Element {
    pub fn local_name(&self) -> &str {
        self.name.rsplit(':').next().unwrap_or(&self.name)
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn is_self_closing(&self) -> bool {
        self.open_span == self.close_span
    }

    /// Span between the end of the start tag and the start of the end tag.
    pub fn inner_span(&self) -> Span {
        if self.is_self_closing() {
            Span::new(self.open_span.end, self.open_span.end)
        } else {
            Span::new(self.open_span.end, self.close_span.start)
        }
    }

    pub fn child_elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(Node::as_element)
    }

    /// Concatenated text of the direct text children.
    pub fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|n| match n {
                Node::Text(t) => Some(t.text.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// A parsed document: the root element plus whatever surrounds it.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub prolog: Vec<Node>,
    pub root: Element,
    pub epilog: Vec<Node>,
}

const XMLNS_XML: &str = "http://www.w3.org/XML/1998/namespace";

struct Builder<'s> {
    src: &'s str,
    stack: Vec<Element>,
    scopes: Vec<Vec<(String, String)>>,
    top: Vec<Node>,
}

impl<'s> Builder<'s> {
    fn resolve(&self, qname: &str, own: &[(String, String)]) -> Option<String> {
        let prefix = match qname.split_once(':') {
            Some((p, _)) => p,
            None => "",
        };
        if prefix == "xml" {
            return Some(XMLNS_XML.to_string());
        }
        own.iter()
            .rev()
            .chain(self.scopes.iter().rev().flat_map(|s| s.iter().rev()))
            .find(|(p, _)| p == prefix)
            .map(|(_, uri)| uri.clone())
            .filter(|uri| !uri.is_empty())
    }

    fn push_node(&mut self, node: Node) {
        match self.stack.last_mut() {
            Some(parent) => parent.children.push(node),
            None => self.top.push(node),
        }
    }

    fn start(
        &mut self,
        e: &quick_xml::events::BytesStart<'_>,
        span: Span,
    ) -> Result<Element, XmlError> {
        let name = std::str::from_utf8(e.name().as_ref())
            .map_err(|_| XmlError::at(self.src, span.start, "element name is not UTF-8"))?
            .to_string();
        let mut attrs = Vec::new();
        let mut decls = Vec::new();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| XmlError::at(self.src, span.start, err.to_string()))?;
            let key = std::str::from_utf8(attr.key.as_ref())
                .map_err(|_| XmlError::at(self.src, span.start, "attribute name is not UTF-8"))?
                .to_string();
            let value = attr
                .unescape_value()
                .map_err(|err| XmlError::at(self.src, span.start, err.to_string()))?
                .into_owned();
            if key == "xmlns" {
                decls.push((String::new(), value.clone()));
            } else if let Some(p) = key.strip_prefix("xmlns:") {
                decls.push((p.to_string(), value.clone()));
            }
            attrs.push((key, value));
        }
        let namespace = self.resolve(&name, &decls);
        self.scopes.push(decls);
        Ok(Element {
            name,
            namespace,
            attrs,
            children: Vec::new(),
            span,
            open_span: span,
            close_span: span,
        })
    }
}

/// Parse a sequence of top-level nodes. Several sibling elements are allowed,
/// which is what fragment sources (e.g. a CMP followed by an FMP) look like.
pub fn parse_nodes(src: &str) -> Result<Vec<Node>, XmlError> {
    let mut reader = Reader::from_str(src);
    reader.config_mut().trim_text(false);
    reader.config_mut().check_end_names = true;
    reader.config_mut().check_comments = true;

    let mut b = Builder {
        src,
        stack: Vec::new(),
        scopes: Vec::new(),
        top: Vec::new(),
    };

    loop {
        let start = reader.buffer_position() as usize;
        let event = match reader.read_event() {
            Ok(ev) => ev,
            Err(err) => {
                let pos = reader.error_position() as usize;
                return Err(XmlError::at(src, pos, err.to_string()));
            }
        };
        let end = reader.buffer_position() as usize;
        let span = Span::new(start, end);
        match event {
            Event::Start(e) => {
                let el = b.start(&e, span)?;
                b.stack.push(el);
            }
            Event::Empty(e) => {
                let el = b.start(&e, span)?;
                b.scopes.pop();
                b.push_node(Node::Element(el));
            }
            Event::End(_) => {
                let mut el = b
                    .stack
                    .pop()
                    .ok_or_else(|| XmlError::at(src, start, "unexpected end tag"))?;
                b.scopes.pop();
                el.close_span = span;
                el.span = Span::new(el.open_span.start, end);
                b.push_node(Node::Element(el));
            }
            Event::Text(t) => {
                let text = t
                    .unescape()
                    .map_err(|err| XmlError::at(src, start, err.to_string()))?
                    .into_owned();
                b.push_node(Node::Text(Text { text, span }));
            }
            Event::CData(c) => {
                let text = String::from_utf8(c.into_inner().into_owned())
                    .map_err(|_| XmlError::at(src, start, "CDATA is not UTF-8"))?;
                b.push_node(Node::Text(Text { text, span }));
            }
            Event::Comment(_) => b.push_node(Node::Comment(span)),
            Event::Decl(_) | Event::PI(_) | Event::DocType(_) => b.push_node(Node::Other(span)),
            Event::Eof => break,
        }
    }
    if let Some(open) = b.stack.last() {
        return Err(XmlError::at(
            src,
            src.len(),
            format!("unclosed element <{}>", open.name),
        ));
    }
    Ok(b.top)
}

/// Parse a complete document with exactly one root element.
pub fn parse_document(src: &str) -> Result<Document, XmlError> {
    let nodes = parse_nodes(src)?;
    let mut prolog = Vec::new();
    let mut root = None;
    let mut epilog = Vec::new();
    for node in nodes {
        match node {
            Node::Element(el) if root.is_none() => root = Some(el),
            Node::Element(el) => {
                return Err(XmlError::at(src, el.span.start, "more than one root element"));
            }
            Node::Text(ref t) if !node.is_trivia() => {
                return Err(XmlError::at(src, t.span.start, "text outside the root element"));
            }
            other if root.is_none() => prolog.push(other),
            other => epilog.push(other),
        }
    }
    let root = root.ok_or_else(|| XmlError::at(src, src.len(), "no root element"))?;
    Ok(Document {
        prolog,
        root,
        epilog,
    })
}

pub fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\t' => out.push_str("&#9;"),
            '\r' => out.push_str("&#13;"),
            _ => out.push(c),
        }
    }
    out
}

/// Start tag with attributes in alphabetical order.
pub fn start_tag(name: &str, attrs: &[(&str, &str)], self_closing: bool) -> String {
    let mut sorted: Vec<_> = attrs.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    let mut out = format!("<{name}");
    for (k, v) in sorted {
        out.push(' ');
        out.push_str(k);
        out.push_str("=\"");
        out.push_str(&escape_attr(v));
        out.push('"');
    }
    out.push_str(if self_closing { "/>" } else { ">" });
    out
}
