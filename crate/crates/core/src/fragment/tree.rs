use std::fmt;

use serde::Serialize;

use super::{FragmentError, FragmentId, Level, SubPart};
use crate::om::{parse_cd, serialize_cd, ContentDictionary, OmError, SymbolDef, SymbolItem};
use crate::xml::{self, line_col, Element, Node, Span, XmlError};

pub const XINCLUDE_NS: &str = "http://www.w3.org/2001/XInclude";

const UPPER_LEVEL_ELEMENTS: &[&str] = &[
    "CD",
    "CDDefinition",
    "Name",
    "Role",
    "Description",
    "CDName",
    "CDURL",
    "CDBase",
    "CDReviewDate",
    "CDDate",
    "CDVersion",
    "CDRevision",
    "CDStatus",
    "CDUses",
];

/// The include element that stands in for a split-away child.
pub fn include_link(id: &FragmentId) -> String {
    format!(r#"<xi:include xmlns:xi="{XINCLUDE_NS}" href="{id}"/>"#)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FragmentKind {
    CdOutline,
    SymbolOutline,
    Property,
    Example,
}

impl fmt::Display for FragmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FragmentKind::CdOutline => "CD outline",
            FragmentKind::SymbolOutline => "symbol outline",
            FragmentKind::Property => "property",
            FragmentKind::Example => "example",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FragmentNode {
    pub id: FragmentId,
    pub kind: FragmentKind,
    pub source: String,
    pub dirty: bool,
    /// Byte range of the expanded fragment in the tree's CD text.
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentTree {
    pub root: FragmentId,
    nodes: Vec<FragmentNode>,
    text: String,
    last_changed: Option<FragmentId>,
}

impl FragmentTree {
    /// Nodes in document order, the CD outline first.
    pub fn nodes(&self) -> &[FragmentNode] {
        &self.nodes
    }

    pub fn get(&self, id: &FragmentId) -> Option<&FragmentNode> {
        self.nodes.iter().find(|n| &n.id == id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The full CD text this tree was split from.
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn dirty_ids(&self) -> Vec<&FragmentId> {
        self.nodes.iter().filter(|n| n.dirty).map(|n| &n.id).collect()
    }

    /// The fragment named in the most recent successful edit.
    pub fn last_changed(&self) -> Option<&FragmentId> {
        self.last_changed.as_ref()
    }

    /// Direct children of a node, in outline order.
    pub fn children(&self, id: &FragmentId) -> Vec<&FragmentId> {
        self.nodes
            .iter()
            .filter(|n| n.id.parent().as_ref() == Some(id))
            .map(|n| &n.id)
            .collect()
    }

    /// Expanded source of one fragment: the node with its includes resolved.
    pub fn expanded(&self, id: &FragmentId) -> Result<String, FragmentError> {
        expand(self, id)
    }

    fn get_mut(&mut self, id: &FragmentId) -> Option<&mut FragmentNode> {
        self.nodes.iter_mut().find(|n| &n.id == id)
    }
}

/// Split a parsed CD text directly.
pub fn split_source(src: &str) -> Result<FragmentTree, OmError> {
    Ok(split_parsed(&parse_cd(src)?))
}

/// Split a CD into one node per CD, symbol definition, property group and
/// example. A model edited since parsing is serialized first.
pub fn split_cd(cd: &ContentDictionary) -> FragmentTree {
    let text = serialize_cd(cd);
    if cd.head.is_some() && text == cd.source {
        split_parsed(cd)
    } else {
        split_parsed(&parse_cd(&text).expect("serialized CD re-parses"))
    }
}

/// A run of items that forms one fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ItemGroup {
    pub part: SubPart,
    pub first: usize,
    pub last: usize,
}

/// CMPs directly followed by FMPs form one property; other CMPs and FMPs
/// stand alone; every example is its own fragment.
pub(crate) fn group_items(items: &[SymbolItem]) -> Vec<ItemGroup> {
    let mut groups = Vec::new();
    let (mut prop, mut ex) = (0, 0);
    let mut i = 0;
    while i < items.len() {
        if let SymbolItem::Example(_) = items[i] {
            ex += 1;
            groups.push(ItemGroup {
                part: SubPart::Ex(ex),
                first: i,
                last: i,
            });
            i += 1;
            continue;
        }
        let mut j = i;
        while j < items.len() && items[j].is_cmp() {
            j += 1;
        }
        let cmp_end = j;
        while cmp_end > i && j < items.len() && items[j].is_fmp() {
            j += 1;
        }
        if j > cmp_end {
            prop += 1;
            groups.push(ItemGroup {
                part: SubPart::Prop(prop),
                first: i,
                last: j - 1,
            });
            i = j;
        } else {
            let end = if cmp_end > i { cmp_end } else { i + 1 };
            for k in i..end {
                prop += 1;
                groups.push(ItemGroup {
                    part: SubPart::Prop(prop),
                    first: k,
                    last: k,
                });
            }
            i = end;
        }
    }
    groups
}

fn split_parsed(cd: &ContentDictionary) -> FragmentTree {
    let src = cd.source.as_str();
    let cd_id = FragmentId::cd(cd.name());
    let mut children = Vec::new();
    let mut outline = String::new();
    let mut cursor = 0;
    for def in &cd.symbols {
        let span = def.span.expect("parsed definitions carry spans");
        let sym_id = FragmentId::symbol(cd.name(), def.name.clone());
        outline.push_str(&src[cursor..span.start]);
        outline.push_str(&include_link(&sym_id));
        cursor = span.end;
        split_def(src, def, sym_id, &mut children);
    }
    outline.push_str(&src[cursor..]);

    let mut nodes = Vec::with_capacity(children.len() + 1);
    nodes.push(FragmentNode {
        id: cd_id.clone(),
        kind: FragmentKind::CdOutline,
        source: outline,
        dirty: false,
        span: Span::new(0, src.len()),
    });
    nodes.extend(children);
    FragmentTree {
        root: cd_id,
        nodes,
        text: src.to_string(),
        last_changed: None,
    }
}

fn split_def(src: &str, def: &SymbolDef, sym_id: FragmentId, out: &mut Vec<FragmentNode>) {
    let span = def.span.expect("parsed definitions carry spans");
    let mut outline = String::new();
    let mut cursor = span.start;
    let mut items = Vec::new();
    for g in group_items(&def.items) {
        let start = def.items[g.first].span().expect("parsed items carry spans").start;
        let end = def.items[g.last].span().expect("parsed items carry spans").end;
        let id = sym_id.with_part(g.part);
        outline.push_str(&src[cursor..start]);
        outline.push_str(&include_link(&id));
        cursor = end;
        items.push(FragmentNode {
            id,
            kind: match g.part {
                SubPart::Prop(_) => FragmentKind::Property,
                SubPart::Ex(_) => FragmentKind::Example,
            },
            source: src[start..end].to_string(),
            dirty: false,
            span: Span::new(start, end),
        });
    }
    outline.push_str(&src[cursor..span.end]);
    out.push(FragmentNode {
        id: sym_id,
        kind: FragmentKind::SymbolOutline,
        source: outline,
        dirty: false,
        span,
    });
    out.extend(items);
}

fn is_include(el: &Element) -> bool {
    el.local_name() == "include" && el.namespace.as_deref() == Some(XINCLUDE_NS)
}

fn collect_includes<'e>(el: &'e Element, out: &mut Vec<&'e Element>) {
    for child in el.child_elements() {
        if is_include(child) {
            out.push(child);
        } else {
            collect_includes(child, out);
        }
    }
}

fn parse_error(kind: FragmentKind, e: XmlError) -> FragmentError {
    FragmentError::FragmentParse {
        kind,
        message: e.message,
        line: e.line,
        column: e.column,
    }
}

/// Include targets of an outline source, with the byte span of each link.
fn includes(kind: FragmentKind, source: &str) -> Result<Vec<(Span, String)>, FragmentError> {
    let doc = xml::parse_document(source).map_err(|e| parse_error(kind, e))?;
    let mut found = Vec::new();
    collect_includes(&doc.root, &mut found);
    found
        .into_iter()
        .map(|el| {
            let href = el.attr("href").ok_or_else(|| FragmentError::FragmentParse {
                kind,
                message: "include without href".into(),
                line: line_col(source, el.span.start).0,
                column: line_col(source, el.span.start).1,
            })?;
            Ok((el.span, href.to_string()))
        })
        .collect()
}

fn expand(tree: &FragmentTree, id: &FragmentId) -> Result<String, FragmentError> {
    let node = tree
        .get(id)
        .ok_or_else(|| FragmentError::DanglingInclude(id.to_string()))?;
    if matches!(node.kind, FragmentKind::Property | FragmentKind::Example) {
        return Ok(node.source.clone());
    }
    let mut out = String::with_capacity(node.source.len());
    let mut cursor = 0;
    for (span, href) in includes(node.kind, &node.source)? {
        let child: FragmentId = href
            .parse()
            .map_err(|_| FragmentError::DanglingInclude(href.clone()))?;
        if child.parent().as_ref() != Some(id) {
            return Err(FragmentError::DanglingInclude(href));
        }
        out.push_str(&node.source[cursor..span.start]);
        out.push_str(&expand(tree, &child)?);
        cursor = span.end;
    }
    out.push_str(&node.source[cursor..]);
    Ok(out)
}

/// Merge all fragments back into one CD text. Clean trees give back the bytes
/// they were split from.
pub fn reassemble(tree: &FragmentTree) -> Result<String, FragmentError> {
    let text = expand(tree, &tree.root)?;
    parse_cd(&text).map_err(FragmentError::ReassemblyParse)?;
    Ok(text)
}

fn granularity(id: &FragmentId, kind: FragmentKind, element: &str) -> FragmentError {
    FragmentError::GranularityViolation {
        id: id.clone(),
        kind,
        element: element.to_string(),
    }
}

fn check_item_source(id: &FragmentId, kind: FragmentKind, src: &str) -> Result<(), FragmentError> {
    let nodes = xml::parse_nodes(src).map_err(|e| parse_error(kind, e))?;
    let allowed: &[&str] = match kind {
        FragmentKind::Property => &["CMP", "FMP"],
        _ => &["Example"],
    };
    let mut count = 0;
    for node in &nodes {
        let el = match node {
            Node::Element(el) => el,
            Node::Text(t) if !node.is_trivia() => {
                let (line, column) = line_col(src, t.span.start);
                return Err(FragmentError::FragmentParse {
                    kind,
                    message: "text outside any element".into(),
                    line,
                    column,
                });
            }
            _ => continue,
        };
        let name = el.local_name();
        if UPPER_LEVEL_ELEMENTS.contains(&name) {
            return Err(granularity(id, kind, name));
        }
        let (line, column) = line_col(src, el.span.start);
        if !allowed.contains(&name) {
            return Err(FragmentError::FragmentParse {
                kind,
                message: format!("expected {}, found <{name}>", allowed.join(" or ")),
                line,
                column,
            });
        }
        let loc = crate::om::SourceLoc {
            span: el.span,
            lead: Span::new(el.span.start, el.span.start),
        };
        crate::om::parse_item(src, el, loc, name).map_err(|e| {
            let (line, column) = e.position().unwrap_or((line, column));
            FragmentError::FragmentParse {
                kind,
                message: e.to_string(),
                line,
                column,
            }
        })?;
        count += 1;
    }
    if count == 0 {
        return Err(FragmentError::FragmentParse {
            kind,
            message: "fragment is empty".into(),
            line: 1,
            column: 1,
        });
    }
    Ok(())
}

fn check_outline_source(
    id: &FragmentId,
    kind: FragmentKind,
    src: &str,
) -> Result<(), FragmentError> {
    let doc = xml::parse_document(src).map_err(|e| parse_error(kind, e))?;
    let expected = match kind {
        FragmentKind::CdOutline => "CD",
        _ => "CDDefinition",
    };
    let root = doc.root.local_name();
    if root != expected {
        if root == "CD" {
            return Err(granularity(id, kind, root));
        }
        let (line, column) = line_col(src, doc.root.span.start);
        return Err(FragmentError::FragmentParse {
            kind,
            message: format!("expected <{expected}>, found <{root}>"),
            line,
            column,
        });
    }
    if kind == FragmentKind::SymbolOutline {
        for child in doc.root.child_elements() {
            let name = child.local_name();
            if name != "Name"
                && name != "Role"
                && name != "Description"
                && UPPER_LEVEL_ELEMENTS.contains(&name)
            {
                return Err(granularity(id, kind, name));
            }
        }
    }
    Ok(())
}

fn stub_definition(symbol: &str) -> String {
    format!("<CDDefinition>\n<Name>{symbol}</Name>\n<Description></Description>\n</CDDefinition>")
}

/// Replace one fragment's source and normalize the tree.
///
/// The edited tree is merged, re-parsed and split again, so a definition
/// pasted into the CD outline becomes its own symbol node and property runs
/// are regrouped. An include in the CD outline that names a new symbol of this
/// CD gets an empty definition to be filled in by a later edit. Byte-identical
/// sources leave the tree unchanged.
pub fn apply_fragment_edit(
    tree: &FragmentTree,
    id: &FragmentId,
    new_source: &str,
) -> Result<FragmentTree, FragmentError> {
    let node = tree
        .get(id)
        .ok_or_else(|| FragmentError::UnknownFragment(id.clone()))?;
    if node.source == new_source {
        return Ok(tree.clone());
    }
    let kind = node.kind;
    match kind {
        FragmentKind::Property | FragmentKind::Example => check_item_source(id, kind, new_source)?,
        _ => check_outline_source(id, kind, new_source)?,
    }

    let mut edited = tree.clone();
    edited.get_mut(id).expect("node exists").source = new_source.to_string();
    if kind == FragmentKind::CdOutline {
        for (_, href) in includes(kind, new_source)? {
            let Ok(target) = href.parse::<FragmentId>() else {
                continue;
            };
            if target.level() == Level::Symbol && target.cd == tree.root.cd && edited.get(&target).is_none() {
                let symbol = target.symbol.clone().expect("symbol level");
                edited.nodes.push(FragmentNode {
                    id: target,
                    kind: FragmentKind::SymbolOutline,
                    source: stub_definition(&symbol),
                    dirty: true,
                    span: Span::default(),
                });
            }
        }
    }

    let text = expand(&edited, &edited.root)?;
    let cd = parse_cd(&text).map_err(FragmentError::ReassemblyParse)?;
    if cd.name() != tree.root.cd {
        return Err(FragmentError::ReassemblyParse(OmError::Schema {
            path: "CD/CDName".into(),
            reason: format!("CDName cannot change from '{}' to '{}'", tree.root.cd, cd.name()),
            line: 1,
            column: 1,
        }));
    }
    let mut next = split_parsed(&cd);
    for n in &mut next.nodes {
        n.dirty = match tree.get(&n.id) {
            Some(old) => old.dirty || old.source != n.source,
            None => true,
        };
    }
    next.last_changed = Some(id.clone());
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "<CD>\n<CDName>t1</CDName>\n<CDDefinition>\n<Name>a</Name>\n<Description>d</Description>\n<CMP>x</CMP>\n<FMP><OMOBJ><OMV name=\"x\"/></OMOBJ></FMP>\n<Example>e</Example>\n<CMP>y</CMP>\n</CDDefinition>\n</CD>\n";

    fn id(s: &str) -> FragmentId {
        s.parse().unwrap()
    }

    #[test]
    fn splits_into_levels() {
        let tree = split_source(SRC).unwrap();
        let ids: Vec<String> = tree.nodes().iter().map(|n| n.id.to_string()).collect();
        assert_eq!(ids, ["cd:t1", "cd:t1+a", "cd:t1+a+prop1", "cd:t1+a+ex1", "cd:t1+a+prop2"]);
        assert_eq!(tree.get(&id("cd:t1+a+prop1")).unwrap().source, "<CMP>x</CMP>\n<FMP><OMOBJ><OMV name=\"x\"/></OMOBJ></FMP>");
        let outline = &tree.get(&id("cd:t1")).unwrap().source;
        assert!(outline.contains(r#"<xi:include xmlns:xi="http://www.w3.org/2001/XInclude" href="cd:t1+a"/>"#));
        assert!(!outline.contains("<Name>"));
        assert_eq!(reassemble(&tree).unwrap(), SRC);
    }

    #[test]
    fn grouping_rule() {
        let cd = parse_cd("<CD><CDName>g</CDName><CDDefinition><Name>s</Name>\
            <FMP><OMOBJ><OMI>1</OMI></OMOBJ></FMP><CMP>a</CMP><CMP>b</CMP><FMP><OMOBJ><OMI>1</OMI></OMOBJ></FMP>\
            <FMP><OMOBJ><OMI>2</OMI></OMOBJ></FMP><CMP>c</CMP></CDDefinition></CD>").unwrap();
        let groups: Vec<(usize, usize)> = group_items(&cd.symbols[0].items).iter().map(|g| (g.first, g.last)).collect();
        assert_eq!(groups, [(0, 0), (1, 4), (5, 5)]);
    }

    #[test]
    fn identical_edit_is_noop() {
        let tree = split_source(SRC).unwrap();
        let src = tree.get(&id("cd:t1+a")).unwrap().source.clone();
        let next = apply_fragment_edit(&tree, &id("cd:t1+a"), &src).unwrap();
        assert!(next.dirty_ids().is_empty());
        assert_eq!(next, tree);
    }

    #[test]
    fn item_edits_are_checked() {
        let tree = split_source(SRC).unwrap();
        let prop = id("cd:t1+a+prop1");
        let err = apply_fragment_edit(&tree, &prop, "<CDDefinition><Name>z</Name></CDDefinition>").unwrap_err();
        assert_eq!(err.code(), "GranularityViolation");
        let err = apply_fragment_edit(&tree, &prop, "<CMP>unclosed").unwrap_err();
        assert_eq!(err.code(), "FragmentParseError");
        let err = apply_fragment_edit(&tree, &prop, "<FMP><OMOBJ><OMA/></OMOBJ></FMP>").unwrap_err();
        assert_eq!(err.code(), "FragmentParseError");
        let err = apply_fragment_edit(&tree, &id("cd:t1+zz"), "").unwrap_err();
        assert_eq!(err, FragmentError::UnknownFragment(id("cd:t1+zz")));
    }

    #[test]
    fn edit_marks_only_that_node() {
        let tree = split_source(SRC).unwrap();
        let next = apply_fragment_edit(&tree, &id("cd:t1+a+ex1"), "<Example>changed</Example>").unwrap();
        assert_eq!(next.dirty_ids(), [&id("cd:t1+a+ex1")]);
        assert_eq!(next.last_changed(), Some(&id("cd:t1+a+ex1")));
        assert_eq!(reassemble(&next).unwrap(), SRC.replace("<Example>e</Example>", "<Example>changed</Example>"));
    }

    #[test]
    fn two_step_new_symbol() {
        let tree = split_source(SRC).unwrap();
        let outline = tree.get(&tree.root).unwrap().source.clone();
        let with_link = outline.replace("\n</CD>", &format!("\n{}\n</CD>", include_link(&id("cd:t1+b"))));
        let step1 = apply_fragment_edit(&tree, &tree.root, &with_link).unwrap();
        assert!(step1.get(&id("cd:t1+b")).is_some());
        let step2 = apply_fragment_edit(
            &step1,
            &id("cd:t1+b"),
            "<CDDefinition>\n<Name>b</Name>\n<Description>new</Description>\n<CMP>p</CMP>\n</CDDefinition>",
        )
        .unwrap();
        let cd = parse_cd(&reassemble(&step2).unwrap()).unwrap();
        assert_eq!(cd.symbol("b").unwrap().description, "new");
        assert!(step2.get(&id("cd:t1+b+prop1")).is_some());
    }

    #[test]
    fn dangling_include_is_rejected() {
        let tree = split_source(SRC).unwrap();
        let outline = tree.get(&id("cd:t1+a")).unwrap().source.clone();
        let broken = outline.replace("href=\"cd:t1+a+ex1\"", "href=\"cd:t1+a+ex9\"");
        let err = apply_fragment_edit(&tree, &id("cd:t1+a"), &broken).unwrap_err();
        assert_eq!(err, FragmentError::DanglingInclude("cd:t1+a+ex9".into()));
    }
}
