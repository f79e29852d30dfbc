//! The structural triple graph and its query language.

mod eval;
mod extract;
mod ns;
mod parse;
mod query;
mod store;

pub use eval::{eval_query, Solutions};
pub use extract::extract_triples;
pub(crate) use extract::metadata_predicate;
pub use ns::{forum_iri, page_iri, post_iri, Namespaces, PrefixTable, RDF_NS, RDF_TYPE};
pub use parse::parse_query;
pub use query::{Pattern, PatternTerm, Query, QueryError, TriplePattern};
pub use store::{Term, Triple, TripleStore};

use crate::fragment::FragmentId;

/// Pages with a discussion containing an Issue that no Decision decides.
pub const OPEN_ISSUES_QUERY: &str = "SELECT DISTINCT ?P WHERE {
  ?P ikewiki:hasDiscussion ?D .
  ?C a arguonto:Issue;
     sioc:has_container ?D .
  OPTIONAL { ?Dec arguonto:decides ?C . }
  FILTER (!bound(?Dec)) }";

/// The open-issues query, optionally restricted to pages of one type
/// (`CDDefinition`, `ContentDictionary`, ...).
pub fn open_issues_query(ns: &Namespaces, page_type: Option<&str>) -> Query {
    let mut q = parse_query(OPEN_ISSUES_QUERY, &ns.prefixes()).expect("built-in query parses");
    if let Some(t) = page_type {
        q.patterns.insert(
            0,
            Pattern::Triple(TriplePattern {
                subject: PatternTerm::Var("P".into()),
                predicate: PatternTerm::Iri(RDF_TYPE.into()),
                object: PatternTerm::Iri(ns.omo(t)),
            }),
        );
    }
    q
}

/// Fragment ids of pages with open issues, in sorted order.
pub fn open_issues(store: &TripleStore, ns: &Namespaces, page_type: Option<&str>) -> Vec<FragmentId> {
    let sols = eval_query(&open_issues_query(ns, page_type), store);
    sols.column("P")
        .into_iter()
        .filter_map(|t| t.as_iri()?.strip_prefix("page:")?.parse().ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn issue_store(decided: bool) -> TripleStore {
        let ns = Namespaces::default();
        let mut t = vec![
            Triple::new("page:cd:arith1", ns.ikewiki("hasDiscussion"), Term::iri("forum:cd:arith1")),
            Triple::new("page:cd:arith1+plus", ns.ikewiki("hasDiscussion"), Term::iri("forum:cd:arith1+plus")),
            Triple::new("post:1", RDF_TYPE, Term::iri(ns.arguonto("Issue"))),
            Triple::new("post:1", ns.sioc("has_container"), Term::iri("forum:cd:arith1")),
        ];
        if decided {
            t.push(Triple::new("post:2", ns.arguonto("decides"), Term::iri("post:1")));
        }
        TripleStore::new(t)
    }

    #[test]
    fn undecided_issue_is_open() {
        let ns = Namespaces::default();
        assert_eq!(open_issues(&issue_store(false), &ns, None), ["cd:arith1".parse::<FragmentId>().unwrap()]);
        assert!(open_issues(&issue_store(false), &ns, Some("CDDefinition")).is_empty());
    }

    #[test]
    fn decided_issue_is_not() {
        assert!(open_issues(&issue_store(true), &Namespaces::default(), None).is_empty());
    }
}
