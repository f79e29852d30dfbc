//! The wiki engine: versioned CD, notation and signature files, their
//! fragment trees, the triple graph, the render cache and the forums, kept
//! consistent across edits.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::Duration;
use serde::Serialize;
use thiserror::Error;

use crate::cache::{input_digest, RenderCache};
use crate::discussion::{DiscussionError, Discussions, NewPost, Post, PostType};
use crate::fragment::{apply_fragment_edit, reassemble, split_cd, FragmentError, FragmentId, FragmentKind, FragmentTree, Level};
use crate::graph::{
    eval_query, extract_triples, metadata_predicate, open_issues, parse_query, Namespaces, QueryError, Solutions,
    Triple, TripleStore,
};
use crate::notation::{parse_ntn, render_page, serialize_ntn, KnownSymbols, NotationDef, NotationError, NotationTable, RenderedPage};
use crate::om::{is_ncname, parse_cd_with, parse_sts, symbol_index, validate_cd, ContentDictionary, Diagnostic, OmError, ParseOptions, SymbolKey, CD_NS};
use crate::vcs::{build_log_message, Clock, LockToken, RepoPath, Repository, Revision, SystemClock, VcsError, DEFAULT_LOCK_TTL};

/// File next to the repository journal holding all posts as JSON Lines.
pub const DISCUSSIONS_FILE: &str = "discussions.jsonl";

#[derive(Debug, Error)]
pub enum WikiError {
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error(transparent)]
    Vcs(#[from] VcsError),
    #[error(transparent)]
    Om(#[from] OmError),
    #[error(transparent)]
    Notation(#[from] NotationError),
    #[error(transparent)]
    Discussion(#[from] DiscussionError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("unknown fragment {0}")]
    UnknownFragment(String),
    #[error("content dictionary {0} already exists")]
    CdExists(String),
    #[error("'{0}' is not a valid name")]
    InvalidName(String),
    #[error("{0}")]
    Invalid(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl WikiError {
    pub fn code(&self) -> &'static str {
        match self {
            WikiError::Fragment(e) => e.code(),
            WikiError::Vcs(e) => e.code(),
            WikiError::Om(e) => e.code(),
            WikiError::Notation(e) => e.code(),
            WikiError::Discussion(e) => e.code(),
            WikiError::Query(e) => e.code(),
            WikiError::UnknownFragment(_) => "UnknownFragment",
            WikiError::CdExists(_) => "CdExists",
            WikiError::InvalidName(_) => "InvalidName",
            WikiError::Invalid(_) => "Invalid",
            WikiError::Io(_) => "IoError",
        }
    }

    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            WikiError::Fragment(e) => e.position(),
            WikiError::Om(e) => e.position(),
            WikiError::Notation(e) => e.position(),
            WikiError::Query(e) => e.position(),
            _ => None,
        }
    }
}

pub type Result<T, E = WikiError> = std::result::Result<T, E>;

pub struct WikiConfig {
    pub namespaces: Namespaces,
    pub lock_ttl: Duration,
    pub clock: Arc<dyn Clock>,
    /// Applied to every CD the wiki reads or accepts.
    pub parse: ParseOptions,
}

impl Default for WikiConfig {
    fn default() -> Self {
        WikiConfig {
            namespaces: Namespaces::default(),
            lock_ttl: DEFAULT_LOCK_TTL,
            clock: Arc::new(SystemClock),
            parse: ParseOptions::default(),
        }
    }
}

/// One content dictionary at some revision.
#[derive(Debug, Clone)]
pub struct CdEntry {
    pub path: RepoPath,
    pub cd: ContentDictionary,
    pub tree: FragmentTree,
}

/// Everything derived from one repository revision plus the forums.
#[derive(Debug)]
pub struct State {
    pub revision: u64,
    pub cds: BTreeMap<String, CdEntry>,
    pub notation_paths: BTreeMap<String, RepoPath>,
    pub signature_paths: BTreeMap<String, RepoPath>,
    pub table: NotationTable,
    pub known: KnownSymbols,
    pub known_digest: String,
    structural: Vec<Triple>,
    pub discussions: Arc<Discussions>,
    pub store: TripleStore,
}

impl State {
    pub fn cd(&self, name: &str) -> Option<&CdEntry> {
        self.cds.get(name)
    }

    fn entry_for(&self, id: &FragmentId) -> Result<&CdEntry> {
        let entry = self.cds.get(&id.cd).ok_or_else(|| WikiError::UnknownFragment(id.to_string()))?;
        if entry.tree.get(id).is_none() {
            return Err(WikiError::UnknownFragment(id.to_string()));
        }
        Ok(entry)
    }

    /// Every fragment id, CD by CD in tree order.
    pub fn page_ids(&self) -> Vec<FragmentId> {
        self.cds
            .values()
            .flat_map(|e| e.tree.nodes().iter().map(|n| n.id.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum EditOutcome {
    /// The edit left the file as it was; no revision was created.
    Unchanged { revision: u64 },
    Committed { revision: u64, message: String },
}

impl EditOutcome {
    pub fn revision(&self) -> u64 {
        match self {
            EditOutcome::Unchanged { revision } | EditOutcome::Committed { revision, .. } => *revision,
        }
    }
}

/// Result of a notation edit: the commit and the pages evicted from the cache.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NotationEdit {
    pub outcome: EditOutcome,
    pub changed_symbols: Vec<SymbolKey>,
    pub evicted: BTreeSet<FragmentId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CacheMetrics {
    pub renders: u64,
    pub hits: u64,
    pub entries: usize,
    pub revision: u64,
}

pub struct Wiki {
    repo: Repository,
    ns: Namespaces,
    parse: ParseOptions,
    state: RwLock<Arc<State>>,
    cache: RenderCache,
    writer: Mutex<()>,
    discussions_path: PathBuf,
}

impl std::fmt::Debug for Wiki {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Wiki").field("repo", &self.repo).finish()
    }
}

impl Wiki {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        Self::open_with(dir, WikiConfig::default())
    }

    pub fn open_with(dir: impl AsRef<Path>, config: WikiConfig) -> Result<Self> {
        let repo = Repository::open_with(dir.as_ref(), config.clock, config.lock_ttl)?;
        let discussions_path = dir.as_ref().join(DISCUSSIONS_FILE);
        let discussions = match fs::read_to_string(&discussions_path) {
            Ok(text) => Discussions::from_jsonl(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Discussions::new(),
            Err(e) => return Err(e.into()),
        };
        let state = build_state(&repo, &config.namespaces, config.parse, Arc::new(discussions))?;
        Ok(Wiki {
            repo,
            ns: config.namespaces,
            parse: config.parse,
            state: RwLock::new(Arc::new(state)),
            cache: RenderCache::new(),
            writer: Mutex::new(()),
            discussions_path,
        })
    }

    pub fn repository(&self) -> &Repository {
        &self.repo
    }

    pub fn namespaces(&self) -> &Namespaces {
        &self.ns
    }

    pub fn cache(&self) -> &RenderCache {
        &self.cache
    }

    /// The current snapshot; it stays valid while later edits proceed.
    pub fn state(&self) -> Arc<State> {
        self.state.read().unwrap().clone()
    }

    pub fn head(&self) -> u64 {
        self.state().revision
    }

    /// Swap in a new state; the cache is cleared when the set of defined
    /// symbols changed, since any page may flag a symbol as unresolved.
    fn install(&self, new: State) {
        let mut slot = self.state.write().unwrap();
        if slot.known_digest != new.known_digest {
            self.cache.clear();
        }
        *slot = Arc::new(new);
    }

    /// Commit all `.ocd`, `.ntn` and `.sts` files below `dir`.
    pub fn import_dir(&self, dir: impl AsRef<Path>, author: &str) -> Result<Option<Revision>> {
        let _w = self.writer.lock().unwrap();
        let rev = self
            .repo
            .import_dir(dir.as_ref(), author, &format!("[{author}@SWiM] imported files"))?;
        self.install(build_state(&self.repo, &self.ns, self.parse, self.state().discussions.clone())?);
        Ok(rev)
    }

    pub fn export(&self, dir: impl AsRef<Path>) -> Result<usize> {
        Ok(self.repo.export(dir)?)
    }

    pub fn cd_names(&self) -> Vec<String> {
        self.state().cds.keys().cloned().collect()
    }

    /// Rendered page, served from the cache when its inputs are unchanged.
    pub fn page(&self, id: &FragmentId) -> Result<Arc<RenderedPage>> {
        // Held across the render so a concurrent notation edit cannot
        // evict between reading the table and storing the result.
        let guard = self.state.read().unwrap();
        let st = guard.clone();
        let entry = st.entry_for(id)?;
        let node = entry.tree.get(id).expect("checked");
        let digest = input_digest([id.to_string().as_str(), node.span.slice(entry.tree.text())]);
        let page = self
            .cache
            .get_or_render(id, &digest, st.revision, || render_page(id, &entry.cd, &st.table, &st.known))?;
        drop(guard);
        Ok(page)
    }

    /// Raw source of one fragment and the revision it was read at.
    pub fn source(&self, id: &FragmentId) -> Result<(String, u64)> {
        let st = self.state();
        let entry = st.entry_for(id)?;
        Ok((entry.tree.get(id).expect("checked").source.clone(), st.revision))
    }

    /// OpenMath objects of a fragment, one `OMOBJ` per line.
    pub fn objects(&self, id: &FragmentId) -> Result<String> {
        let st = self.state();
        let entry = st.entry_for(id)?;
        let mut out = String::new();
        for o in fragment_objects(&entry.cd, id) {
            out.push_str(&o.to_xml());
            out.push('\n');
        }
        Ok(out)
    }

    /// Replace a fragment's source, reassemble its CD and commit it.
    /// `base` is the revision the edit started from (head when `None`).
    pub fn edit_fragment(
        &self,
        id: &FragmentId,
        new_source: &str,
        author: &str,
        summary: Option<&str>,
        base: Option<u64>,
    ) -> Result<EditOutcome> {
        let _w = self.writer.lock().unwrap();
        let st = self.state();
        let entry = st.entry_for(id)?;
        let tree = apply_fragment_edit(&entry.tree, id, new_source)?;
        let text = reassemble(&tree)?;
        if text == entry.tree.text() {
            return Ok(EditOutcome::Unchanged { revision: st.revision });
        }
        let new_cd = parse_cd_with(&text, self.parse)?;
        if new_cd.name() != entry.cd.name() {
            return Err(WikiError::Invalid(format!(
                "CDName cannot change from {} to {} by an edit",
                entry.cd.name(),
                new_cd.name()
            )));
        }
        let summary = match summary.map(str::trim).filter(|s| !s.is_empty()) {
            Some(s) => s.to_string(),
            None => describe_change(&entry.cd, &new_cd, id, &self.ns),
        };
        let message = build_log_message(author, &summary, id)?;
        let rev = match self
            .repo
            .commit(&[(entry.path.clone(), text)], author, &message, base.unwrap_or(st.revision))
        {
            Ok(rev) => rev,
            Err(VcsError::NoChanges) => return Ok(EditOutcome::Unchanged { revision: st.revision }),
            Err(e) => return Err(e.into()),
        };
        self.install(build_state(&self.repo, &self.ns, self.parse, st.discussions.clone())?);
        Ok(EditOutcome::Committed {
            revision: rev.number,
            message,
        })
    }

    /// Current notation dictionary text of a CD (canonical form when the CD
    /// has none yet).
    pub fn notation_source(&self, cd: &str) -> Result<(String, u64)> {
        let st = self.state();
        if !st.cds.contains_key(cd) && !st.notation_paths.contains_key(cd) {
            return Err(WikiError::UnknownFragment(format!("cd:{cd}")));
        }
        match st.notation_paths.get(cd) {
            Some(path) => Ok((self.repo.update(path, Some(st.revision))?.0, st.revision)),
            None => Ok((serialize_ntn(cd, &[]), st.revision)),
        }
    }

    /// Replace the notation dictionary of `cd`, commit it, and evict every
    /// cached page showing a symbol whose notation changed.
    pub fn edit_notations(
        &self,
        cd: &str,
        source: &str,
        author: &str,
        summary: Option<&str>,
        base: Option<u64>,
    ) -> Result<NotationEdit> {
        let _w = self.writer.lock().unwrap();
        let st = self.state();
        if !is_ncname(cd) {
            return Err(WikiError::InvalidName(cd.to_string()));
        }
        let defs = parse_ntn(source)?;
        if let Some(d) = defs.iter().find(|d| d.symbol.cd != cd) {
            return Err(WikiError::Invalid(format!("notation for {} filed under {cd}", d.symbol)));
        }
        let table = st.table.with_cd(cd, defs)?;
        let changed = changed_symbols(&st.table, &table, cd);
        let path = match st.notation_paths.get(cd) {
            Some(p) => p.clone(),
            None => RepoPath::notation(cd)?,
        };
        let fragment = FragmentId::cd(cd);
        let summary = summary
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .unwrap_or_else(|| "changed notations".to_string());
        let message = build_log_message(author, &summary, &fragment)?;
        let outcome = match self
            .repo
            .commit(&[(path, source.to_string())], author, &message, base.unwrap_or(st.revision))
        {
            Ok(rev) => EditOutcome::Committed {
                revision: rev.number,
                message,
            },
            Err(VcsError::NoChanges) => EditOutcome::Unchanged { revision: st.revision },
            Err(e) => return Err(e.into()),
        };
        let new_state = build_state(&self.repo, &self.ns, self.parse, st.discussions.clone())?;
        let mut slot = self.state.write().unwrap();
        let mut evicted = BTreeSet::new();
        for sym in &changed {
            evicted.extend(self.cache.invalidate_for_symbol(sym, &slot.store, &self.ns));
        }
        if slot.known_digest != new_state.known_digest {
            self.cache.clear();
        }
        *slot = Arc::new(new_state);
        Ok(NotationEdit {
            outcome,
            changed_symbols: changed,
            evicted,
        })
    }

    /// Create an empty CD.
    pub fn create_cd(&self, name: &str, description: &str, author: &str) -> Result<EditOutcome> {
        let _w = self.writer.lock().unwrap();
        if !is_ncname(name) {
            return Err(WikiError::InvalidName(name.to_string()));
        }
        let st = self.state();
        if st.cds.contains_key(name) {
            return Err(WikiError::CdExists(name.to_string()));
        }
        let path = RepoPath::cd(name)?;
        if self.repo.exists(&path) {
            return Err(WikiError::CdExists(name.to_string()));
        }
        let text = cd_skeleton(name, description);
        parse_cd_with(&text, self.parse)?;
        let message = build_log_message(author, &format!("created content dictionary {name}"), &FragmentId::cd(name))?;
        let rev = self.repo.commit(&[(path, text)], author, &message, st.revision)?;
        self.install(build_state(&self.repo, &self.ns, self.parse, st.discussions.clone())?);
        Ok(EditOutcome::Committed {
            revision: rev.number,
            message,
        })
    }

    /// Revisions that touched a fragment, newest first: edits of the
    /// fragment itself or something inside it, and whole-file commits.
    pub fn history(&self, id: &FragmentId) -> Result<Vec<Revision>> {
        let st = self.state();
        let entry = st.entry_for(id)?;
        let revs = self.repo.history(&entry.path)?;
        Ok(revs
            .into_iter()
            .filter(|r| match changed_fragment(&r.message) {
                Some(f) => f.ancestors_and_self().contains(id),
                None => true,
            })
            .collect())
    }

    /// Lock the file holding a fragment for `user`.
    pub fn lock(&self, id: &FragmentId, user: &str) -> Result<LockToken> {
        let st = self.state();
        let entry = st.entry_for(id)?;
        Ok(self.repo.lock(&entry.path, user)?)
    }

    pub fn unlock(&self, token: &LockToken) -> Result<()> {
        Ok(self.repo.unlock(token)?)
    }

    pub fn discussion(&self, id: &FragmentId) -> Result<Vec<Post>> {
        let st = self.state();
        st.entry_for(id)?;
        Ok(st.discussions.forum(id).into_iter().cloned().collect())
    }

    /// Reply types allowed under `parent`, or for a new thread.
    pub fn reply_types(&self, parent: Option<&str>) -> Result<BTreeSet<PostType>> {
        let st = self.state();
        let parent = match parent {
            Some(p) => Some(st.discussions.get(p).ok_or_else(|| DiscussionError::UnknownPost(p.to_string()))?),
            None => None,
        };
        Ok(st.discussions.allowed_reply_types(parent))
    }

    /// Add a post to a page's forum, persist it and refresh the graph.
    pub fn add_post(&self, id: &FragmentId, new: NewPost, author: &str) -> Result<Post> {
        let _w = self.writer.lock().unwrap();
        let st = self.state();
        st.entry_for(id)?;
        let mut discussions = (*st.discussions).clone();
        let post = discussions.add_post(id, new, author, self.repo.clock().now())?;
        let line = serde_json::to_string(&post).expect("posts serialize");
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.discussions_path)?;
        writeln!(f, "{line}")?;
        f.sync_all()?;
        let discussions = Arc::new(discussions);
        let store = TripleStore::new(st.structural.iter().cloned().chain(discussions.triples(&self.ns)));
        let new = State {
            revision: st.revision,
            cds: st.cds.clone(),
            notation_paths: st.notation_paths.clone(),
            signature_paths: st.signature_paths.clone(),
            table: st.table.clone(),
            known: st.known.clone(),
            known_digest: st.known_digest.clone(),
            structural: st.structural.clone(),
            discussions,
            store,
        };
        *self.state.write().unwrap() = Arc::new(new);
        Ok(post)
    }

    /// Pages whose forum holds an undecided Issue, optionally only pages of
    /// one type (`ContentDictionary`, `CDDefinition`, `Property`, `Example`).
    pub fn open_issues(&self, page_type: Option<&str>) -> Vec<FragmentId> {
        open_issues(&self.state().store, &self.ns, page_type)
    }

    pub fn query(&self, text: &str) -> Result<Solutions> {
        let q = parse_query(text, &self.ns.prefixes())?;
        Ok(eval_query(&q, &self.state().store))
    }

    pub fn metrics(&self) -> CacheMetrics {
        CacheMetrics {
            renders: self.cache.renders(),
            hits: self.cache.hits(),
            entries: self.cache.len(),
            revision: self.head(),
        }
    }

    /// Validation diagnostics for every CD and signature file.
    pub fn check(&self) -> Result<Vec<Diagnostic>> {
        let st = self.state();
        let cds: Vec<&ContentDictionary> = st.cds.values().map(|e| &e.cd).collect();
        let mut out = Vec::new();
        for e in st.cds.values() {
            out.extend(validate_cd(&e.cd, cds.iter().copied()));
        }
        for (stem, path) in &st.signature_paths {
            let src = self.repo.update(path, Some(st.revision))?.0;
            let empty = ContentDictionary::new(stem);
            let cd = st.cds.get(stem).map(|e| &e.cd).unwrap_or(&empty);
            out.extend(parse_sts(&src, cd)?.diagnostics);
        }
        Ok(out)
    }

    /// Render every page into `dir` as `<fragment id>.html`; returns the count.
    pub fn render_all(&self, dir: impl AsRef<Path>) -> Result<usize> {
        fs::create_dir_all(dir.as_ref())?;
        let ids = self.state().page_ids();
        for id in &ids {
            let page = self.page(id)?;
            fs::write(dir.as_ref().join(format!("{id}.html")), &page.markup)?;
        }
        Ok(ids.len())
    }
}

fn build_state(repo: &Repository, ns: &Namespaces, parse: ParseOptions, discussions: Arc<Discussions>) -> Result<State> {
    let revision = repo.head();
    let mut cds = BTreeMap::new();
    let mut notation_paths = BTreeMap::new();
    let mut signature_paths = BTreeMap::new();
    let mut defs: Vec<NotationDef> = Vec::new();
    let paths = if revision == 0 { Vec::new() } else { repo.paths(Some(revision))? };
    for path in paths {
        match path.extension() {
            "ocd" => {
                let (text, _) = repo.update(&path, Some(revision))?;
                let cd = parse_cd_with(&text, parse)?;
                let tree = split_cd(&cd);
                cds.insert(cd.name().to_string(), CdEntry { path, cd, tree });
            }
            "ntn" => {
                let (text, _) = repo.update(&path, Some(revision))?;
                defs.extend(parse_ntn(&text)?);
                notation_paths.insert(path.stem().to_string(), path);
            }
            _ => {
                signature_paths.insert(path.stem().to_string(), path);
            }
        }
    }
    let table = NotationTable::new(defs)?;
    let known = symbol_index(cds.values().map(|e| &e.cd));
    let mut keys: Vec<String> = known
        .iter()
        .flat_map(|(cd, names)| names.iter().map(move |n| format!("{cd}#{n}")))
        .collect();
    keys.sort();
    let known_digest = input_digest(keys.iter().map(String::as_str));
    let structural: Vec<Triple> = cds
        .values()
        .flat_map(|e| extract_triples(&e.tree, &e.cd, ns))
        .collect();
    let store = TripleStore::new(structural.iter().cloned().chain(discussions.triples(ns)));
    Ok(State {
        revision,
        cds,
        notation_paths,
        signature_paths,
        table,
        known,
        known_digest,
        structural,
        discussions,
        store,
    })
}

/// Symbols of `cd` whose notation differs between the two tables.
fn changed_symbols(old: &NotationTable, new: &NotationTable, cd: &str) -> Vec<SymbolKey> {
    let mut keys: BTreeSet<SymbolKey> = BTreeSet::new();
    keys.extend(old.for_cd(cd).into_iter().map(|d| d.symbol.clone()));
    keys.extend(new.for_cd(cd).into_iter().map(|d| d.symbol.clone()));
    keys.into_iter().filter(|k| old.get(k) != new.get(k)).collect()
}

/// The fragment named on the second line of a commit message.
fn changed_fragment(message: &str) -> Option<FragmentId> {
    message
        .lines()
        .find_map(|l| l.strip_prefix("Actually changed fragment "))
        .and_then(|id| id.trim().parse().ok())
}

fn cd_skeleton(name: &str, description: &str) -> String {
    let description = description.trim();
    let description = if description.is_empty() { "New content dictionary." } else { description };
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<CD xmlns=\"{CD_NS}\">\n<CDName>{}</CDName>\n<Description>{}</Description>\n</CD>\n",
        crate::xml::escape_text(name),
        crate::xml::escape_text(description)
    )
}

fn fragment_objects<'a>(cd: &'a ContentDictionary, id: &FragmentId) -> Vec<&'a crate::om::OMObject> {
    match id.level() {
        Level::Cd => cd.symbols.iter().flat_map(|s| s.objects()).collect(),
        Level::Symbol => cd
            .symbol(id.symbol.as_deref().unwrap_or_default())
            .map(|s| s.objects().collect())
            .unwrap_or_default(),
        Level::Item => {
            let Some(def) = cd.symbol(id.symbol.as_deref().unwrap_or_default()) else {
                return Vec::new();
            };
            crate::fragment::group_items(&def.items)
                .into_iter()
                .find(|g| Some(g.part) == id.part)
                .map(|g| def.items[g.first..=g.last].iter().flat_map(|i| i.objects()).collect())
                .unwrap_or_default()
        }
    }
}

/// A short commit summary naming what an edit changed.
pub fn describe_change(old: &ContentDictionary, new: &ContentDictionary, id: &FragmentId, ns: &Namespaces) -> String {
    match id.level() {
        Level::Cd => {
            let old_syms: BTreeSet<&str> = old.symbols.iter().map(|s| s.name.as_str()).collect();
            let new_syms: BTreeSet<&str> = new.symbols.iter().map(|s| s.name.as_str()).collect();
            if let Some(added) = new_syms.difference(&old_syms).next() {
                return format!("added symbol {added}");
            }
            if let Some(removed) = old_syms.difference(&new_syms).next() {
                return format!("removed symbol {removed}");
            }
            let mut keys: BTreeSet<&str> = BTreeSet::new();
            keys.extend(old.metadata.iter().map(|m| m.key.as_str()));
            keys.extend(new.metadata.iter().map(|m| m.key.as_str()));
            let changed: Vec<&str> = keys
                .into_iter()
                .filter(|k| old.meta(k).map(str::trim) != new.meta(k).map(str::trim))
                .collect();
            match changed.as_slice() {
                [key] => format!("replaced metadata field {}", compact(ns, &metadata_predicate(ns, key))),
                _ => "edited content dictionary outline".to_string(),
            }
        }
        Level::Symbol => {
            let name = id.symbol.as_deref().unwrap_or_default();
            let (Some(a), Some(b)) = (old.symbol(name), new.symbol(name)) else {
                return format!("edited symbol {name}");
            };
            let mut fields = Vec::new();
            if a.description.trim() != b.description.trim() {
                fields.push(ns.dc("description"));
            }
            if a.role != b.role {
                fields.push(ns.omo("role"));
            }
            if a.items != b.items {
                fields.push(String::new());
            }
            match fields.as_slice() {
                [f] if !f.is_empty() => format!("replaced metadata field {}", compact(ns, f)),
                _ => format!("edited symbol {name}"),
            }
        }
        Level::Item => match id.part {
            Some(crate::fragment::SubPart::Ex(_)) => "edited example".to_string(),
            _ => "edited property".to_string(),
        },
    }
}

fn compact(ns: &Namespaces, iri: &str) -> String {
    match ns.prefixes().compact(iri) {
        Some((p, l)) => format!("{p}:{l}"),
        None => format!("<{iri}>"),
    }
}

/// Kind of the fragment `id` in the current state, if it exists.
pub fn fragment_kind(state: &State, id: &FragmentId) -> Option<FragmentKind> {
    state.cds.get(&id.cd)?.tree.get(id).map(|n| n.kind)
}
