//! Per-page forums with argumentation-typed posts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fragment::{FragmentId, Level};
use crate::graph::{forum_iri, post_iri, Namespaces, Term, Triple, RDF_TYPE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PostType {
    Issue,
    Idea,
    Position,
    Decision,
    Question,
    Untyped,
}

impl PostType {
    pub const ALL: [PostType; 6] = [
        PostType::Issue,
        PostType::Idea,
        PostType::Position,
        PostType::Decision,
        PostType::Question,
        PostType::Untyped,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PostType::Issue => "Issue",
            PostType::Idea => "Idea",
            PostType::Position => "Position",
            PostType::Decision => "Decision",
            PostType::Question => "Question",
            PostType::Untyped => "Untyped",
        }
    }
}

impl fmt::Display for PostType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Support,
    Object,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub forum: FragmentId,
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(rename = "type")]
    pub ptype: PostType,
    #[serde(default)]
    pub polarity: Option<Polarity>,
    #[serde(default)]
    pub decided_idea: Option<String>,
    pub author: String,
    pub timestamp: DateTime<Utc>,
    pub body: String,
}

/// A post as submitted, before it gets an id and a timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewPost {
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(rename = "type")]
    pub ptype: PostType,
    #[serde(default)]
    pub polarity: Option<Polarity>,
    #[serde(default)]
    pub decided_idea: Option<String>,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiscussionError {
    #[error("a {ptype} post is not allowed {}", match parent { Some(p) => format!("as a reply to a {p}"), None => "at the top level".to_string() })]
    TypeNotAllowed {
        parent: Option<PostType>,
        ptype: PostType,
    },
    #[error("a Position needs a polarity")]
    MissingPolarity,
    #[error("a Decision must name the Idea it adopts")]
    MissingDecidedIdea,
    #[error("'{0}' is not an Idea in this thread")]
    InvalidDecidedIdea(String),
    #[error("the thread started by {0} has already been decided")]
    AlreadyDecided(String),
    #[error("{0}")]
    InvalidField(String),
    #[error("no post with id '{0}'")]
    UnknownPost(String),
    #[error("post '{0}' belongs to another forum")]
    ForumMismatch(String),
    #[error("post id '{0}' is already taken")]
    DuplicateId(String),
    #[error("line {line}: {message}")]
    Import { line: usize, message: String },
}

impl DiscussionError {
    pub fn code(&self) -> &'static str {
        match self {
            DiscussionError::TypeNotAllowed { .. } => "TypeNotAllowed",
            DiscussionError::MissingPolarity => "MissingPolarity",
            DiscussionError::MissingDecidedIdea => "MissingDecidedIdea",
            DiscussionError::InvalidDecidedIdea(_) => "InvalidDecidedIdea",
            DiscussionError::AlreadyDecided(_) => "AlreadyDecided",
            DiscussionError::InvalidField(_) => "InvalidField",
            DiscussionError::UnknownPost(_) => "UnknownPost",
            DiscussionError::ForumMismatch(_) => "ForumMismatch",
            DiscussionError::DuplicateId(_) => "DuplicateId",
            DiscussionError::Import { .. } => "ImportError",
        }
    }
}

/// Reply types offered under a post of type `parent` (`None` for a new
/// thread), not counting Decision.
pub fn base_reply_types(parent: Option<PostType>) -> BTreeSet<PostType> {
    use PostType::*;
    match parent {
        None => [Issue, Question, Untyped].into(),
        Some(Issue) => [Idea, Question, Untyped].into(),
        Some(Idea) => [Position, Question, Untyped].into(),
        Some(_) => [Question, Untyped].into(),
    }
}

/// All posts of all forums.
#[derive(Debug, Clone, Default)]
pub struct Discussions {
    posts: Vec<Post>,
    index: HashMap<String, usize>,
    /// Thread root id → id of the Decision closing it.
    decided: HashMap<String, String>,
}

impl Discussions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Post> {
        self.index.get(id).map(|&i| &self.posts[i])
    }

    /// Posts of one forum in insertion order.
    pub fn forum(&self, forum: &FragmentId) -> Vec<&Post> {
        self.posts.iter().filter(|p| &p.forum == forum).collect()
    }

    /// The post that started the thread containing `id`.
    pub fn thread_root<'a>(&'a self, post: &'a Post) -> &'a Post {
        let mut cur = post;
        while let Some(parent) = cur.parent.as_deref().and_then(|p| self.get(p)) {
            cur = parent;
        }
        cur
    }

    /// The Decision that closed the thread rooted at `root`, if any.
    pub fn decision_for(&self, root: &str) -> Option<&Post> {
        self.decided.get(root).and_then(|d| self.get(d))
    }

    pub fn allowed_reply_types(&self, parent: Option<&Post>) -> BTreeSet<PostType> {
        let mut set = base_reply_types(parent.map(|p| p.ptype));
        if let Some(p) = parent {
            let root = self.thread_root(p);
            if root.ptype == PostType::Issue && !self.decided.contains_key(&root.id) {
                set.insert(PostType::Decision);
            }
        }
        set
    }

    /// Validate and store a new post; it gets the next free id.
    pub fn add_post(
        &mut self,
        forum: &FragmentId,
        new: NewPost,
        author: &str,
        now: DateTime<Utc>,
    ) -> Result<Post, DiscussionError> {
        let mut n = self.posts.len() + 1;
        while self.index.contains_key(&format!("p{n}")) {
            n += 1;
        }
        let post = Post {
            id: format!("p{n}"),
            forum: forum.clone(),
            parent: new.parent,
            ptype: new.ptype,
            polarity: new.polarity,
            decided_idea: new.decided_idea,
            author: author.to_string(),
            timestamp: now,
            body: new.body,
        };
        self.insert(post.clone())?;
        Ok(post)
    }

    /// Check a complete post against the thread rules without storing it.
    pub fn check(&self, post: &Post) -> Result<(), DiscussionError> {
        if post.id.is_empty() || post.id.chars().any(char::is_whitespace) {
            return Err(DiscussionError::InvalidField(format!("invalid post id '{}'", post.id)));
        }
        if self.index.contains_key(&post.id) {
            return Err(DiscussionError::DuplicateId(post.id.clone()));
        }
        let parent = match &post.parent {
            Some(pid) => {
                let p = self.get(pid).ok_or_else(|| DiscussionError::UnknownPost(pid.clone()))?;
                if p.forum != post.forum {
                    return Err(DiscussionError::ForumMismatch(pid.clone()));
                }
                Some(p)
            }
            None => None,
        };
        if post.ptype == PostType::Decision {
            if let Some(p) = parent {
                let root = self.thread_root(p);
                if root.ptype == PostType::Issue && self.decided.contains_key(&root.id) {
                    return Err(DiscussionError::AlreadyDecided(root.id.clone()));
                }
            }
        }
        if !self.allowed_reply_types(parent).contains(&post.ptype) {
            return Err(DiscussionError::TypeNotAllowed {
                parent: parent.map(|p| p.ptype),
                ptype: post.ptype,
            });
        }
        match (post.ptype, post.polarity) {
            (PostType::Position, None) => return Err(DiscussionError::MissingPolarity),
            (PostType::Position, Some(_)) | (_, None) => {}
            (_, Some(_)) => {
                return Err(DiscussionError::InvalidField("only a Position has a polarity".into()));
            }
        }
        match (post.ptype, &post.decided_idea) {
            (PostType::Decision, None) => return Err(DiscussionError::MissingDecidedIdea),
            (PostType::Decision, Some(idea)) => {
                let root = self.thread_root(parent.expect("a Decision is always a reply"));
                let ok = self
                    .get(idea)
                    .is_some_and(|i| i.ptype == PostType::Idea && self.thread_root(i).id == root.id);
                if !ok {
                    return Err(DiscussionError::InvalidDecidedIdea(idea.clone()));
                }
            }
            (_, None) => {}
            (_, Some(_)) => {
                return Err(DiscussionError::InvalidField("only a Decision names a decided idea".into()));
            }
        }
        Ok(())
    }

    /// Store a complete post after checking it.
    pub fn insert(&mut self, post: Post) -> Result<(), DiscussionError> {
        self.check(&post)?;
        if post.ptype == PostType::Decision {
            let parent = self.get(post.parent.as_deref().expect("checked")).expect("checked");
            let root = self.thread_root(parent).id.clone();
            self.decided.insert(root, post.id.clone());
        }
        self.index.insert(post.id.clone(), self.posts.len());
        self.posts.push(post);
        Ok(())
    }

    /// Graph triples for every post: its type, forum, parent and, for a
    /// Decision, the issue it decides.
    pub fn triples(&self, ns: &Namespaces) -> Vec<Triple> {
        let mut out = Vec::new();
        for p in &self.posts {
            let s = post_iri(&p.id);
            out.push(Triple::new(&s, RDF_TYPE, Term::iri(ns.sioc("Post"))));
            if p.ptype != PostType::Untyped {
                out.push(Triple::new(&s, RDF_TYPE, Term::iri(ns.arguonto(p.ptype.as_str()))));
            }
            out.push(Triple::new(&s, ns.sioc("has_container"), Term::iri(forum_iri(&p.forum))));
            if let Some(parent) = &p.parent {
                out.push(Triple::new(&s, ns.sioc("reply_of"), Term::iri(post_iri(parent))));
            }
            if p.ptype == PostType::Decision {
                let root = self.thread_root(p);
                out.push(Triple::new(&s, ns.arguonto("decides"), Term::iri(post_iri(&root.id))));
            }
            out.push(Triple::new(&s, ns.dc("creator"), Term::literal(&p.author)));
        }
        out
    }

    /// One JSON object per line, in insertion order.
    pub fn to_jsonl(&self) -> String {
        self.posts
            .iter()
            .map(|p| serde_json::to_string(p).expect("posts serialize") + "\n")
            .collect()
    }

    /// Load posts from JSON Lines, checking each against the ones before it.
    pub fn from_jsonl(text: &str) -> Result<Self, DiscussionError> {
        let mut d = Discussions::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let import = |message: String| DiscussionError::Import { line: i + 1, message };
            let post: Post = serde_json::from_str(line).map_err(|e| import(e.to_string()))?;
            d.insert(post).map_err(|e| import(e.to_string()))?;
        }
        Ok(d)
    }
}

/// Post counts by type and by page granularity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    pub total: usize,
    pub by_type: BTreeMap<PostType, usize>,
    pub cd_level: usize,
    pub symbol_level: usize,
    pub item_level: usize,
    pub untyped: usize,
}

impl StatsReport {
    pub fn count(&self, t: PostType) -> usize {
        self.by_type.get(&t).copied().unwrap_or(0)
    }

    pub fn typed(&self) -> usize {
        self.total - self.untyped
    }
}

pub fn corpus_stats<'a>(posts: impl IntoIterator<Item = &'a Post>) -> StatsReport {
    let mut r = StatsReport::default();
    for p in posts {
        r.total += 1;
        *r.by_type.entry(p.ptype).or_default() += 1;
        match p.forum.level() {
            Level::Cd => r.cd_level += 1,
            Level::Symbol => r.symbol_level += 1,
            Level::Item => r.item_level += 1,
        }
        if p.ptype == PostType::Untyped {
            r.untyped += 1;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn new(parent: Option<&str>, ptype: PostType) -> NewPost {
        NewPost {
            parent: parent.map(str::to_string),
            ptype,
            polarity: None,
            decided_idea: None,
            body: "text".into(),
        }
    }

    fn page() -> FragmentId {
        "cd:arith1+plus".parse().unwrap()
    }

    #[test]
    fn issue_idea_decision() {
        let mut d = Discussions::new();
        let now = Utc::now();
        let issue = d.add_post(&page(), new(None, PostType::Issue), "ann", now).unwrap();
        assert!(d.allowed_reply_types(Some(&issue)).contains(&PostType::Idea));
        let idea = d.add_post(&page(), new(Some(&issue.id), PostType::Idea), "bo", now).unwrap();
        let err = d.add_post(&page(), new(Some(&idea.id), PostType::Position), "bo", now).unwrap_err();
        assert_eq!(err, DiscussionError::MissingPolarity);
        let mut dec = new(Some(&idea.id), PostType::Decision);
        assert_eq!(d.add_post(&page(), dec.clone(), "ann", now).unwrap_err(), DiscussionError::MissingDecidedIdea);
        dec.decided_idea = Some(idea.id.clone());
        d.add_post(&page(), dec.clone(), "ann", now).unwrap();
        assert!(matches!(d.add_post(&page(), dec, "ann", now), Err(DiscussionError::AlreadyDecided(_))));
        assert!(!d.allowed_reply_types(Some(&idea)).contains(&PostType::Decision));
        let back = Discussions::from_jsonl(&d.to_jsonl()).unwrap();
        assert_eq!(back.posts(), d.posts());
    }

    #[test]
    fn top_level_and_untyped() {
        let d = Discussions::new();
        assert_eq!(
            d.allowed_reply_types(None),
            [PostType::Issue, PostType::Question, PostType::Untyped].into()
        );
        let mut d = d;
        let q = d.add_post(&page(), new(None, PostType::Question), "a", Utc::now()).unwrap();
        assert!(d.add_post(&page(), new(Some(&q.id), PostType::Untyped), "a", Utc::now()).is_ok());
        assert!(matches!(
            d.add_post(&page(), new(None, PostType::Idea), "a", Utc::now()),
            Err(DiscussionError::TypeNotAllowed { parent: None, .. })
        ));
    }

    #[test]
    fn stats_by_hand() {
        let mut d = Discussions::new();
        let now = Utc::now();
        let i = d.add_post(&page(), new(None, PostType::Issue), "a", now).unwrap();
        d.add_post(&page(), new(None, PostType::Issue), "a", now).unwrap();
        d.add_post(&page(), new(Some(&i.id), PostType::Idea), "a", now).unwrap();
        let r = corpus_stats(d.posts());
        assert_eq!((r.count(PostType::Issue), r.count(PostType::Idea), r.symbol_level), (2, 1, 3));
        assert_eq!(corpus_stats(&[]), StatsReport::default());
    }
}
