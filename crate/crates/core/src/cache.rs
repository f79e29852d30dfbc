//! Rendered-page cache with dependency-driven eviction.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use sha2::{Digest, Sha256};

use crate::fragment::{fragment_for_symbol, FragmentId};
use crate::graph::{eval_query, page_iri, Namespaces, Pattern, PatternTerm, Query, Term, TripleStore, TriplePattern};
use crate::notation::RenderedPage;
use crate::om::SymbolKey;

#[derive(Debug, Clone)]
pub struct CacheEntry {
    pub page: FragmentId,
    pub rendered: Arc<RenderedPage>,
    pub built_at_revision: u64,
    /// Digest of everything the page was rendered from apart from notations.
    pub input_digest: String,
}

#[derive(Debug, Default)]
struct Inner {
    entries: HashMap<FragmentId, CacheEntry>,
    /// Bumped by every eviction; a render that started before it is not stored.
    generation: u64,
}

#[derive(Debug, Default)]
pub struct RenderCache {
    inner: RwLock<Inner>,
    renders: AtomicU64,
    hits: AtomicU64,
}

/// Hex SHA-256 of the given parts, each length-prefixed.
pub fn input_digest<'a>(parts: impl IntoIterator<Item = &'a str>) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

impl RenderCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// The cached page if it was built from `digest`, otherwise the result
    /// of `render`, which is stored unless an eviction happened meanwhile.
    pub fn get_or_render<E>(
        &self,
        page: &FragmentId,
        digest: &str,
        revision: u64,
        render: impl FnOnce() -> Result<RenderedPage, E>,
    ) -> Result<Arc<RenderedPage>, E> {
        let generation = {
            let inner = self.inner.read().unwrap();
            if let Some(e) = inner.entries.get(page).filter(|e| e.input_digest == digest) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(e.rendered.clone());
            }
            inner.generation
        };
        self.renders.fetch_add(1, Ordering::Relaxed);
        let rendered = Arc::new(render()?);
        let mut inner = self.inner.write().unwrap();
        if inner.generation == generation {
            inner.entries.insert(
                page.clone(),
                CacheEntry {
                    page: page.clone(),
                    rendered: rendered.clone(),
                    built_at_revision: revision,
                    input_digest: digest.to_string(),
                },
            );
        }
        Ok(rendered)
    }

    pub fn entry(&self, page: &FragmentId) -> Option<CacheEntry> {
        self.inner.read().unwrap().entries.get(page).cloned()
    }

    pub fn cached_pages(&self) -> BTreeSet<FragmentId> {
        self.inner.read().unwrap().entries.keys().cloned().collect()
    }

    /// Evict every page whose rendering may depend on the notation of `sym`
    /// and return that set.
    pub fn invalidate_for_symbol(&self, sym: &SymbolKey, store: &TripleStore, ns: &Namespaces) -> BTreeSet<FragmentId> {
        let pages = pages_using_symbol(store, ns, sym);
        self.evict(&pages);
        pages
    }

    pub fn evict<'a>(&self, pages: impl IntoIterator<Item = &'a FragmentId>) {
        let mut inner = self.inner.write().unwrap();
        inner.generation += 1;
        for p in pages {
            inner.entries.remove(p);
        }
    }

    pub fn clear(&self) {
        let mut inner = self.inner.write().unwrap();
        inner.generation += 1;
        inner.entries.clear();
    }

    /// Number of renders performed so far.
    pub fn renders(&self) -> u64 {
        self.renders.load(Ordering::Relaxed)
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Pages containing a formula that uses `sym`, together with every page
/// that contains one of them.
pub fn pages_using_symbol(store: &TripleStore, ns: &Namespaces, sym: &SymbolKey) -> BTreeSet<FragmentId> {
    let Ok(target) = fragment_for_symbol(&sym.cd, &sym.name) else {
        return BTreeSet::new();
    };
    let query = Query {
        select: vec!["P".into()],
        distinct: true,
        patterns: vec![Pattern::Triple(TriplePattern {
            subject: PatternTerm::Var("P".into()),
            predicate: PatternTerm::Iri(ns.omo("usesSymbol")),
            object: PatternTerm::Iri(page_iri(&target)),
        })],
    };
    let direct: Vec<String> = eval_query(&query, store)
        .column("P")
        .into_iter()
        .filter_map(|t| t.as_iri().map(str::to_string))
        .collect();
    let has_part = ns.omo("hasPart");
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut todo = direct;
    while let Some(iri) = todo.pop() {
        if !seen.insert(iri.clone()) {
            continue;
        }
        let object = Term::iri(&iri);
        for t in store.matching(None, Some(&has_part), Some(&object)) {
            todo.push(t.subject.clone());
        }
    }
    seen.iter()
        .filter_map(|iri| iri.strip_prefix("page:")?.parse().ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_miss_and_eviction() {
        let cache = RenderCache::new();
        let page: FragmentId = "cd:a+b".parse().unwrap();
        let render = || Ok::<_, ()>(RenderedPage::default());
        cache.get_or_render(&page, "d1", 1, render).unwrap();
        cache.get_or_render(&page, "d1", 2, render).unwrap();
        assert_eq!((cache.renders(), cache.hits()), (1, 1));
        assert_eq!(cache.entry(&page).unwrap().built_at_revision, 1);
        cache.get_or_render(&page, "d2", 3, render).unwrap();
        assert_eq!(cache.renders(), 2);
        cache.evict([&page]);
        assert!(cache.is_empty());
    }

    #[test]
    fn digest_separates_parts() {
        assert_ne!(input_digest(["ab", "c"]), input_digest(["a", "bc"]));
    }
}
