use std::collections::{HashMap, HashSet};

use super::mathml::render_object_with;
use super::{NotationError, NotationTable, RenderedPage};
use crate::fragment::{group_items, FragmentId, SubPart};
use crate::om::{ContentDictionary, ExampleSegment, OMObject, PropertyKind, SymbolDef, SymbolItem, SymbolKey};
use crate::xml::{escape_attr, escape_text};

/// Defined symbol names keyed by CD name, as built by `om::symbol_index`.
pub type KnownSymbols = HashMap<String, HashSet<String>>;

pub fn page_href(id: &FragmentId) -> String {
    format!("/page/{id}")
}

/// Render the page for any fragment of `cd` as an XHTML fragment: the CD
/// with all its symbols, one symbol, or one property or example.
pub fn render_page(
    id: &FragmentId,
    cd: &ContentDictionary,
    table: &NotationTable,
    known: &KnownSymbols,
) -> Result<RenderedPage, NotationError> {
    let unknown = || NotationError::UnknownFragment(id.to_string());
    if id.cd != cd.name() {
        return Err(unknown());
    }
    let mut w = PageWriter {
        out: String::new(),
        page: RenderedPage::default(),
        table,
        known,
        formulas: 0,
    };
    w.out.push_str(&format!(
        "<div class=\"page\" data-fragment=\"{}\">\n",
        escape_attr(&id.to_string())
    ));
    match (&id.symbol, id.part) {
        (None, _) => {
            let children: Vec<FragmentId> = cd
                .symbols
                .iter()
                .map(|s| FragmentId::symbol(cd.name(), &s.name))
                .collect();
            w.nav(None, &children);
            w.cd_header(cd);
            for def in &cd.symbols {
                w.out.push_str(&format!(
                    "<section class=\"symbol\" data-fragment=\"{}\">\n",
                    escape_attr(&FragmentId::symbol(cd.name(), &def.name).to_string())
                ));
                w.symbol_body(cd.name(), def);
                w.out.push_str("</section>\n");
            }
        }
        (Some(name), None) => {
            let def = cd.symbol(name).ok_or_else(unknown)?;
            let children: Vec<FragmentId> = group_items(&def.items)
                .iter()
                .map(|g| id.with_part(g.part))
                .collect();
            w.nav(id.parent(), &children);
            w.symbol_body(cd.name(), def);
        }
        (Some(name), Some(part)) => {
            let def = cd.symbol(name).ok_or_else(unknown)?;
            let group = group_items(&def.items)
                .into_iter()
                .find(|g| g.part == part)
                .ok_or_else(unknown)?;
            w.nav(id.parent(), &[]);
            w.group(id, &def.items[group.first..=group.last]);
        }
    }
    w.out.push_str("</div>\n");
    w.page.markup = w.out;
    Ok(w.page)
}

struct PageWriter<'a> {
    out: String,
    page: RenderedPage,
    table: &'a NotationTable,
    known: &'a KnownSymbols,
    formulas: usize,
}

impl PageWriter<'_> {
    fn link(&mut self, rel: &str, id: &FragmentId) {
        let s = id.to_string();
        self.out.push_str(&format!(
            "<a rel=\"{rel}\" href=\"{}\">{}</a>",
            escape_attr(&page_href(id)),
            escape_text(&s)
        ));
    }

    fn nav(&mut self, parent: Option<FragmentId>, children: &[FragmentId]) {
        self.out.push_str("<nav>");
        if let Some(p) = parent {
            self.link("up", &p);
        }
        if !children.is_empty() {
            self.out.push_str("<ul class=\"children\">");
            for c in children {
                self.out.push_str("<li>");
                self.link("child", c);
                self.out.push_str("</li>");
            }
            self.out.push_str("</ul>");
        }
        self.out.push_str("</nav>\n");
    }

    fn cd_header(&mut self, cd: &ContentDictionary) {
        self.out.push_str(&format!("<header>\n<h1>{}</h1>\n<dl>\n", escape_text(cd.name())));
        for m in &cd.metadata {
            self.out.push_str(&format!(
                "<dt>{}</dt><dd>{}</dd>\n",
                escape_text(&m.key),
                escape_text(&squash(&m.value))
            ));
        }
        self.out.push_str("</dl>\n</header>\n");
    }

    fn symbol_body(&mut self, cd: &str, def: &SymbolDef) {
        self.out.push_str(&format!("<h2>{}</h2>\n", escape_text(&def.name)));
        if let Some(role) = &def.role {
            self.out.push_str(&format!("<p class=\"role\">{}</p>\n", escape_text(role.as_str())));
        }
        self.out.push_str(&format!(
            "<p class=\"description\">{}</p>\n",
            escape_text(&squash(&def.description))
        ));
        let sym = FragmentId::symbol(cd, &def.name);
        for g in group_items(&def.items) {
            self.group(&sym.with_part(g.part), &def.items[g.first..=g.last]);
        }
    }

    fn group(&mut self, id: &FragmentId, items: &[SymbolItem]) {
        let class = match id.part {
            Some(SubPart::Ex(_)) => "example",
            _ => "property",
        };
        self.out.push_str(&format!(
            "<div class=\"{class}\" data-fragment=\"{}\">\n",
            escape_attr(&id.to_string())
        ));
        for item in items {
            match item {
                SymbolItem::Property(p) => match &p.kind {
                    PropertyKind::Cmp(text) => {
                        self.out
                            .push_str(&format!("<p class=\"cmp\">{}</p>\n", escape_text(&squash(text))));
                    }
                    PropertyKind::Fmp(o) => {
                        self.out.push_str("<div class=\"fmp\">");
                        self.formula(o);
                        self.out.push_str("</div>\n");
                    }
                },
                SymbolItem::Example(ex) => {
                    for seg in &ex.segments {
                        match seg {
                            ExampleSegment::Text(t) => {
                                let t = squash(t);
                                if !t.is_empty() {
                                    self.out.push_str(&format!("<p>{}</p>\n", escape_text(&t)));
                                }
                            }
                            ExampleSegment::Object(o) => {
                                self.out.push_str("<div class=\"formula\">");
                                self.formula(o);
                                self.out.push_str("</div>\n");
                            }
                        }
                    }
                }
            }
        }
        self.out.push_str("</div>\n");
    }

    fn formula(&mut self, o: &OMObject) {
        self.formulas += 1;
        let prefix = format!("m{}", self.formulas);
        let known = self.known;
        let resolved = |k: &SymbolKey| known.get(&k.cd).is_some_and(|names| names.contains(&k.name));
        let r = render_object_with(o, self.table, &prefix, &resolved);
        self.out.push_str(&r.markup);
        self.page.content_ids.extend(r.content_ids);
    }
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
