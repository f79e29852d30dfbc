use std::collections::BTreeSet;

use super::ns::{forum_iri, page_iri, Namespaces, RDF_TYPE};
use super::store::{Term, Triple};
use crate::fragment::{group_items, fragment_for_symbol, FragmentId, FragmentKind, FragmentTree};
use crate::om::ContentDictionary;

fn page_type(kind: FragmentKind) -> &'static str {
    match kind {
        FragmentKind::CdOutline => "ContentDictionary",
        FragmentKind::SymbolOutline => "CDDefinition",
        FragmentKind::Property => "Property",
        FragmentKind::Example => "Example",
    }
}

pub(crate) fn metadata_predicate(ns: &Namespaces, key: &str) -> String {
    match key {
        "Description" => ns.dc("description"),
        "CDDate" => ns.dc("date"),
        "CDName" => ns.dc("title"),
        other => ns.omo(other),
    }
}

/// Structural triples of one CD: page types, part-whole links, symbol
/// occurrences in FMPs and examples, metadata literals and a discussion forum
/// per page. The result is sorted and free of duplicates.
pub fn extract_triples(tree: &FragmentTree, cd: &ContentDictionary, ns: &Namespaces) -> Vec<Triple> {
    let mut out = BTreeSet::new();
    let has_part = ns.omo("hasPart");
    let has_discussion = ns.ikewiki("hasDiscussion");
    for node in tree.nodes() {
        let page = page_iri(&node.id);
        out.insert(Triple::new(&page, RDF_TYPE, Term::iri(ns.omo(page_type(node.kind)))));
        out.insert(Triple::new(&page, &has_discussion, Term::iri(forum_iri(&node.id))));
        if let Some(parent) = node.id.parent() {
            out.insert(Triple::new(page_iri(&parent), &has_part, Term::iri(&page)));
        }
    }

    let cd_page = page_iri(&tree.root);
    for m in &cd.metadata {
        out.insert(Triple::new(
            &cd_page,
            metadata_predicate(ns, &m.key),
            Term::literal(m.value.trim()),
        ));
    }

    let uses = ns.omo("usesSymbol");
    for def in &cd.symbols {
        let sym_id = FragmentId::symbol(cd.name(), def.name.clone());
        let sym_page = page_iri(&sym_id);
        out.insert(Triple::new(&sym_page, ns.omo("name"), Term::literal(&def.name)));
        if !def.description.trim().is_empty() {
            out.insert(Triple::new(&sym_page, ns.dc("description"), Term::literal(def.description.trim())));
        }
        if let Some(role) = &def.role {
            out.insert(Triple::new(&sym_page, ns.omo("role"), Term::literal(role.as_str())));
        }
        for g in group_items(&def.items) {
            let page = page_iri(&sym_id.with_part(g.part));
            for item in &def.items[g.first..=g.last] {
                for obj in item.objects() {
                    for s in obj.symbols() {
                        let Ok(target) = fragment_for_symbol(&s.cd, &s.name) else {
                            continue;
                        };
                        out.insert(Triple::new(&page, &uses, Term::iri(page_iri(&target))));
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}
