use std::collections::BTreeMap;

use serde::Serialize;

use super::layout::{lay_out, Punct, Sink, SymbolText};
use super::table::NotationTable;
use crate::om::{OMObject, Symbol, SymbolKey};
use crate::xml::{escape_attr, escape_text};

pub const MATHML_NS: &str = "http://www.w3.org/1998/Math/MathML";

/// Rendered markup plus the map from content ids (in the OpenMath
/// annotation) to presentation ids (on the symbol tokens).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RenderedPage {
    pub markup: String,
    pub content_ids: BTreeMap<String, String>,
}

impl RenderedPage {
    /// Number of `<math>` elements in the markup.
    pub fn math_count(&self) -> usize {
        self.markup.matches("<math ").count()
    }
}

/// Render with the id prefix `m` and every symbol considered resolved.
pub fn render_object(o: &OMObject, table: &NotationTable) -> RenderedPage {
    render_object_with(o, table, "m", &|_| true)
}

/// Render `o` as a `<math>` element with parallel markup. Content ids are
/// `{prefix}.c{n}` for the n-th node in pre-order, presentation ids
/// `{prefix}.p{n}`. Symbols for which `resolved` is false are flagged with
/// `data-unresolved="true"`.
pub fn render_object_with(
    o: &OMObject,
    table: &NotationTable,
    prefix: &str,
    resolved: &dyn Fn(&SymbolKey) -> bool,
) -> RenderedPage {
    let mut sink = MathSink {
        out: String::new(),
        prefix,
        resolved,
        content_ids: BTreeMap::new(),
    };
    sink.out.push_str(&format!(
        "<math xmlns=\"{MATHML_NS}\"><semantics><mrow>"
    ));
    lay_out(o, table, &mut sink);
    sink.out.push_str("</mrow><annotation-xml encoding=\"OpenMath\">");
    sink.out.push_str(&o.to_xml_with_ids(&format!("{prefix}.c")));
    sink.out.push_str("</annotation-xml></semantics></math>");
    RenderedPage {
        markup: sink.out,
        content_ids: sink.content_ids,
    }
}

/// Wiki address of the page defining a symbol.
pub(crate) fn symbol_href(s: &Symbol) -> String {
    format!("/page/cd:{}+{}", s.cd, s.name)
}

struct MathSink<'a> {
    out: String,
    prefix: &'a str,
    resolved: &'a dyn Fn(&SymbolKey) -> bool,
    content_ids: BTreeMap<String, String>,
}

impl MathSink<'_> {
    fn token(&mut self, tag: &str, text: &str) {
        self.out.push_str(&format!("<{tag}>{}</{tag}>", escape_text(text)));
    }

    fn mo(&mut self, text: &str, attr: &str) {
        self.out.push_str(&format!("<mo {attr}>{}</mo>", escape_text(text)));
    }
}

impl Sink for MathSink<'_> {
    fn leaf(&mut self, o: &OMObject, _id: usize) {
        match o {
            OMObject::Integer(v) => self.token("mn", &v.to_string()),
            OMObject::Float(v) => self.token("mn", &format!("{v:?}")),
            OMObject::Str(s) => self.token("ms", s),
            OMObject::Bytes(b) => {
                use base64::Engine;
                self.token("ms", &base64::engine::general_purpose::STANDARD.encode(b))
            }
            OMObject::Variable(v) => self.token("mi", v),
            _ => unreachable!("compound objects are laid out elsewhere"),
        }
    }

    fn symbol(&mut self, s: &Symbol, text: SymbolText<'_>, id: usize) {
        let (tag, text) = match text {
            SymbolText::Glyph { glyph, operator: true } => ("mo", glyph.to_string()),
            SymbolText::Glyph { glyph, operator: false } => ("mi", glyph.to_string()),
            SymbolText::Ref => ("mi", format!("{}#{}", s.cd, s.name)),
        };
        let cid = format!("{}.c{id}", self.prefix);
        let pid = format!("{}.p{id}", self.prefix);
        self.out.push_str(&format!(
            "<{tag} id=\"{}\" xref=\"{}\" href=\"{}\"",
            escape_attr(&pid),
            escape_attr(&cid),
            escape_attr(&symbol_href(s))
        ));
        if !(self.resolved)(&s.key()) {
            self.out.push_str(" data-unresolved=\"true\"");
        }
        self.out.push_str(&format!(">{}</{tag}>", escape_text(&text)));
        self.content_ids.insert(cid, pid);
    }

    fn bvar(&mut self, name: &str) {
        self.token("mi", name);
    }

    fn punct(&mut self, p: Punct) {
        match p {
            Punct::CallOpen => self.mo("(", "fence=\"true\""),
            Punct::CallClose => self.mo(")", "fence=\"true\""),
            Punct::BinderOpen => self.mo("[", "fence=\"true\""),
            Punct::BinderClose => self.mo("]", "fence=\"true\""),
            Punct::ArgSep | Punct::VarSep => self.mo(",", "separator=\"true\""),
            Punct::Dot => self.token("mo", "."),
        }
    }

    fn open_fence(&mut self) {
        self.out.push_str("<mrow>");
        self.mo("(", "fence=\"true\"");
    }

    fn close_fence(&mut self) {
        self.mo(")", "fence=\"true\"");
        self.out.push_str("</mrow>");
    }

    fn begin(&mut self) {
        self.out.push_str("<mrow>");
    }

    fn end(&mut self) {
        self.out.push_str("</mrow>");
    }
}
