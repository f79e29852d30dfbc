//! Fragment-granular maintenance of OpenMath content dictionaries.

pub mod cache;
pub mod discussion;
pub mod fragment;
pub mod graph;
pub mod notation;
pub mod om;
pub mod vcs;
pub mod wiki;
pub mod xml;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/content-dictionaries.md")]
    mod content_dictionaries {}
    #[doc = include_str!("../../../book/src/fragments.md")]
    mod fragments {}
    #[doc = include_str!("../../../book/src/repository.md")]
    mod repository {}
    #[doc = include_str!("../../../book/src/graph.md")]
    mod graph {}
    #[doc = include_str!("../../../book/src/notations.md")]
    mod notations {}
    #[doc = include_str!("../../../book/src/render-cache.md")]
    mod render_cache {}
    #[doc = include_str!("../../../book/src/discussions.md")]
    mod discussions {}
    #[doc = include_str!("../../../book/src/wiki.md")]
    mod wiki {}
}
