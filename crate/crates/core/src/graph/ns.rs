use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Namespace IRIs for the vocabularies used in the graph. The wiki, argument
/// and OpenMath-structure namespaces are local placeholders and can be
/// overridden from configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Namespaces {
    pub ikewiki: String,
    pub sioc: String,
    pub arguonto: String,
    pub omo: String,
    pub dc: String,
}

impl Default for Namespaces {
    fn default() -> Self {
        Namespaces {
            ikewiki: "http://ikewiki.example/ns#".into(),
            sioc: "http://rdfs.org/sioc/ns#".into(),
            arguonto: "http://arguonto.example/ns#".into(),
            omo: "http://omo.example/ns#".into(),
            dc: "http://purl.org/dc/elements/1.1/".into(),
        }
    }
}

impl Namespaces {
    pub fn ikewiki(&self, local: &str) -> String {
        format!("{}{local}", self.ikewiki)
    }

    pub fn sioc(&self, local: &str) -> String {
        format!("{}{local}", self.sioc)
    }

    pub fn arguonto(&self, local: &str) -> String {
        format!("{}{local}", self.arguonto)
    }

    pub fn omo(&self, local: &str) -> String {
        format!("{}{local}", self.omo)
    }

    pub fn dc(&self, local: &str) -> String {
        format!("{}{local}", self.dc)
    }

    pub fn prefixes(&self) -> PrefixTable {
        let mut map = BTreeMap::new();
        map.insert("ikewiki".to_string(), self.ikewiki.clone());
        map.insert("sioc".to_string(), self.sioc.clone());
        map.insert("arguonto".to_string(), self.arguonto.clone());
        map.insert("omo".to_string(), self.omo.clone());
        map.insert("dc".to_string(), self.dc.clone());
        map.insert("rdf".to_string(), RDF_NS.to_string());
        PrefixTable(map)
    }
}

/// Prefix → namespace map used when reading and printing queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixTable(BTreeMap<String, String>);

impl Default for PrefixTable {
    fn default() -> Self {
        Namespaces::default().prefixes()
    }
}

impl PrefixTable {
    pub fn expand(&self, prefix: &str, local: &str) -> Option<String> {
        self.0.get(prefix).map(|ns| format!("{ns}{local}"))
    }

    /// Shortest `prefix:local` spelling of an IRI, if any prefix matches.
    pub fn compact(&self, iri: &str) -> Option<(String, String)> {
        self.0
            .iter()
            .filter_map(|(p, ns)| iri.strip_prefix(ns.as_str()).map(|l| (p.clone(), l.to_string())))
            .min_by_key(|(_, l)| l.len())
    }
}

/// IRI of a wiki page.
pub fn page_iri(id: &crate::fragment::FragmentId) -> String {
    format!("page:{id}")
}

/// IRI of a page's discussion forum.
pub fn forum_iri(id: &crate::fragment::FragmentId) -> String {
    format!("forum:{id}")
}

/// IRI of a discussion post.
pub fn post_iri(id: &str) -> String {
    format!("post:{id}")
}
