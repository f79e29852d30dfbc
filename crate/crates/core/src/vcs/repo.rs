use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Clock, RepoPath, SystemClock, VcsError};

pub const DEFAULT_LOCK_TTL: Duration = Duration::minutes(30);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Revision {
    pub number: u64,
    pub author: String,
    pub timestamp: DateTime<Utc>,
    pub message: String,
    pub changed_paths: Vec<RepoPath>,
}

impl Revision {
    /// `r<N> | <user> | <date> | <n> lines`, where n counts message lines.
    pub fn header(&self) -> String {
        let lines = self.message.lines().count();
        format!(
            "r{} | {} | {} | {} line{}",
            self.number,
            self.author,
            self.timestamp.format("%Y-%m-%d %H:%M:%S %z (%a, %d %b %Y)"),
            lines,
            if lines == 1 { "" } else { "s" }
        )
    }

    /// Header followed by the message, as shown in a revision log.
    pub fn display(&self) -> String {
        format!("{}\n{}", self.header(), self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LockToken(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LockInfo {
    pub path: RepoPath,
    pub user: String,
    pub token: LockToken,
    pub acquired: DateTime<Utc>,
    pub expires: DateTime<Utc>,
}

#[derive(Debug, Clone)]
struct Entry {
    digest: String,
    changed_in: u64,
}

type Manifest = BTreeMap<RepoPath, Entry>;

#[derive(Default)]
struct Snapshot {
    revisions: Vec<Arc<Revision>>,
    manifests: Vec<Arc<Manifest>>,
}

impl Snapshot {
    fn head(&self) -> u64 {
        self.revisions.len() as u64
    }

    fn manifest(&self, rev: u64) -> Option<&Manifest> {
        if rev == 0 {
            return None;
        }
        self.manifests.get(rev as usize - 1).map(|m| m.as_ref())
    }
}

/// A repository directory holding `journal/` and `blobs/`.
///
/// Commits are serialized; readers work on the last fully committed snapshot
/// and never block on a commit in progress.
pub struct Repository {
    root: PathBuf,
    state: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    locks: Mutex<HashMap<RepoPath, LockInfo>>,
    clock: Arc<dyn Clock>,
    lock_ttl: Duration,
    tokens: AtomicU64,
}

impl std::fmt::Debug for Repository {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Repository")
            .field("root", &self.root)
            .field("head", &self.head())
            .finish()
    }
}

fn digest(content: &str) -> String {
    hex::encode(Sha256::digest(content.as_bytes()))
}

fn write_atomic(target: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = target.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, target)
}

impl Repository {
    /// Open or create a repository in `dir`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, VcsError> {
        Self::open_with(dir, Arc::new(SystemClock), DEFAULT_LOCK_TTL)
    }

    pub fn open_with(
        dir: impl AsRef<Path>,
        clock: Arc<dyn Clock>,
        lock_ttl: Duration,
    ) -> Result<Self, VcsError> {
        let root = dir.as_ref().to_path_buf();
        fs::create_dir_all(root.join("journal"))?;
        fs::create_dir_all(root.join("blobs"))?;
        let snapshot = load_journal(&root)?;
        Ok(Repository {
            root,
            state: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(()),
            locks: Mutex::new(HashMap::new()),
            clock,
            lock_ttl,
            tokens: AtomicU64::new(0),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    fn snapshot(&self) -> Arc<Snapshot> {
        self.state.read().unwrap().clone()
    }

    /// Latest revision number; 0 for an empty repository.
    pub fn head(&self) -> u64 {
        self.snapshot().head()
    }

    fn blob_path(&self, digest: &str) -> PathBuf {
        self.root.join("blobs").join(&digest[..2]).join(&digest[2..])
    }

    fn read_blob(&self, digest: &str) -> Result<String, VcsError> {
        let bytes = fs::read(self.blob_path(digest))?;
        String::from_utf8(bytes).map_err(|_| VcsError::Corrupt(format!("blob {digest} is not UTF-8")))
    }

    /// Content of `path` at revision `at` (head when `None`), together with
    /// the revision in which that content was last changed.
    pub fn update(&self, path: &RepoPath, at: Option<u64>) -> Result<(String, u64), VcsError> {
        let snap = self.snapshot();
        let rev = at.unwrap_or(snap.head());
        if at.is_some() && (rev == 0 || rev > snap.head()) {
            return Err(VcsError::NoSuchRevision(rev));
        }
        let entry = snap
            .manifest(rev)
            .and_then(|m| m.get(path))
            .ok_or_else(|| VcsError::NotFound(path.clone()))?;
        Ok((self.read_blob(&entry.digest)?, entry.changed_in))
    }

    pub fn exists(&self, path: &RepoPath) -> bool {
        let snap = self.snapshot();
        snap.manifest(snap.head()).is_some_and(|m| m.contains_key(path))
    }

    /// Revision in which `path` last changed.
    pub fn last_changed(&self, path: &RepoPath) -> Option<u64> {
        let snap = self.snapshot();
        snap.manifest(snap.head())
            .and_then(|m| m.get(path))
            .map(|e| e.changed_in)
    }

    /// All paths present at a revision (head when `None`).
    pub fn paths(&self, at: Option<u64>) -> Result<Vec<RepoPath>, VcsError> {
        let snap = self.snapshot();
        let rev = at.unwrap_or(snap.head());
        if rev > snap.head() || (at.is_some() && rev == 0) {
            return Err(VcsError::NoSuchRevision(rev));
        }
        Ok(snap
            .manifest(rev)
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default())
    }

    pub fn revision(&self, number: u64) -> Result<Revision, VcsError> {
        let snap = self.snapshot();
        if number == 0 || number > snap.head() {
            return Err(VcsError::NoSuchRevision(number));
        }
        Ok(snap.revisions[number as usize - 1].as_ref().clone())
    }

    /// Revisions that changed `path`, newest first.
    pub fn history(&self, path: &RepoPath) -> Result<Vec<Revision>, VcsError> {
        let snap = self.snapshot();
        let revs: Vec<Revision> = snap
            .revisions
            .iter()
            .rev()
            .filter(|r| r.changed_paths.contains(path))
            .map(|r| r.as_ref().clone())
            .collect();
        if revs.is_empty() {
            return Err(VcsError::NotFound(path.clone()));
        }
        Ok(revs)
    }

    /// Every revision, newest first.
    pub fn log(&self) -> Vec<Revision> {
        self.snapshot()
            .revisions
            .iter()
            .rev()
            .map(|r| r.as_ref().clone())
            .collect()
    }

    fn active_lock(&self, locks: &mut HashMap<RepoPath, LockInfo>, path: &RepoPath) -> Option<LockInfo> {
        let now = self.clock.now();
        match locks.get(path) {
            Some(l) if l.expires > now => Some(l.clone()),
            Some(_) => {
                locks.remove(path);
                None
            }
            None => None,
        }
    }

    pub fn lock(&self, path: &RepoPath, user: &str) -> Result<LockToken, VcsError> {
        if !self.exists(path) {
            return Err(VcsError::NotFound(path.clone()));
        }
        let mut locks = self.locks.lock().unwrap();
        if let Some(held) = self.active_lock(&mut locks, path) {
            if held.user != user {
                return Err(VcsError::LockHeld {
                    path: path.clone(),
                    user: held.user,
                });
            }
        }
        let now = self.clock.now();
        let n = self.tokens.fetch_add(1, Ordering::Relaxed);
        let seed = format!("{path}\n{user}\n{}\n{n}", now.timestamp_nanos_opt().unwrap_or_default());
        let token = LockToken(digest(&seed)[..32].to_string());
        locks.insert(
            path.clone(),
            LockInfo {
                path: path.clone(),
                user: user.to_string(),
                token: token.clone(),
                acquired: now,
                expires: now + self.lock_ttl,
            },
        );
        Ok(token)
    }

    pub fn unlock(&self, token: &LockToken) -> Result<(), VcsError> {
        let mut locks = self.locks.lock().unwrap();
        let path = locks
            .iter()
            .find(|(_, l)| &l.token == token)
            .map(|(p, _)| p.clone())
            .ok_or(VcsError::UnknownLock)?;
        locks.remove(&path);
        Ok(())
    }

    /// The unexpired lock on `path`, if any.
    pub fn lock_info(&self, path: &RepoPath) -> Option<LockInfo> {
        let mut locks = self.locks.lock().unwrap();
        self.active_lock(&mut locks, path)
    }

    /// Store all files under one new revision.
    ///
    /// Each path must be unchanged since `base`, unless the author holds its
    /// lock. Files identical to their head content are left out of the
    /// revision; if none differ the commit fails with `NoChanges`.
    pub fn commit(
        &self,
        files: &[(RepoPath, String)],
        author: &str,
        message: &str,
        base: u64,
    ) -> Result<Revision, VcsError> {
        if files.is_empty() {
            return Err(VcsError::EmptyCommit);
        }
        if message.trim().is_empty() {
            return Err(VcsError::EmptyMessage);
        }
        let author = author.replace(['\n', '\r'], " ");

        let _guard = self.writer.lock().unwrap();
        let snap = self.snapshot();
        let head = snap.head();
        if base > head {
            return Err(VcsError::NoSuchRevision(base));
        }
        let current = snap.manifest(head).cloned().unwrap_or_default();
        {
            let mut locks = self.locks.lock().unwrap();
            for (path, _) in files {
                let held = self.active_lock(&mut locks, path);
                if let Some(l) = &held {
                    if l.user != author {
                        return Err(VcsError::LockHeld {
                            path: path.clone(),
                            user: l.user.clone(),
                        });
                    }
                }
                if held.is_none() {
                    if let Some(e) = current.get(path) {
                        if e.changed_in > base {
                            return Err(VcsError::Conflict {
                                path: path.clone(),
                                head: e.changed_in,
                            });
                        }
                    }
                }
            }
        }

        let number = head + 1;
        let mut manifest = current.clone();
        let mut changed = Vec::new();
        for (path, content) in files {
            let d = digest(content);
            if current.get(path).is_some_and(|e| e.digest == d) || changed.contains(path) {
                continue;
            }
            let blob = self.blob_path(&d);
            if !blob.exists() {
                fs::create_dir_all(blob.parent().expect("blob has a parent"))?;
                write_atomic(&blob, content.as_bytes())?;
            }
            manifest.insert(
                path.clone(),
                Entry {
                    digest: d,
                    changed_in: number,
                },
            );
            changed.push(path.clone());
        }
        if changed.is_empty() {
            return Err(VcsError::NoChanges);
        }
        changed.sort();

        let revision = Revision {
            number,
            author,
            timestamp: self.clock.now(),
            message: message.to_string(),
            changed_paths: changed,
        };
        write_atomic(
            &self.root.join("journal").join(format!("{number:08}.rev")),
            encode_record(&revision, &manifest).as_bytes(),
        )?;

        let mut next = Snapshot {
            revisions: snap.revisions.clone(),
            manifests: snap.manifests.clone(),
        };
        next.revisions.push(Arc::new(revision.clone()));
        next.manifests.push(Arc::new(manifest));
        *self.state.write().unwrap() = Arc::new(next);
        Ok(revision)
    }

    /// Write the head tree as plain files under `dir`. Returns the file count.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<usize, VcsError> {
        let snap = self.snapshot();
        let Some(manifest) = snap.manifest(snap.head()) else {
            return Ok(0);
        };
        for (path, entry) in manifest {
            let target = dir.as_ref().join(path.as_str());
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(target, self.read_blob(&entry.digest)?)?;
        }
        Ok(manifest.len())
    }

    /// Commit every `.ocd`, `.sts` and `.ntn` file below `dir` that differs
    /// from head. Returns `None` when nothing changed.
    pub fn import_dir(
        &self,
        dir: impl AsRef<Path>,
        author: &str,
        message: &str,
    ) -> Result<Option<Revision>, VcsError> {
        let mut files = Vec::new();
        collect_files(dir.as_ref(), dir.as_ref(), &mut files)?;
        if files.is_empty() {
            return Err(VcsError::EmptyCommit);
        }
        files.sort();
        match self.commit(&files, author, message, self.head()) {
            Ok(rev) => Ok(Some(rev)),
            Err(VcsError::NoChanges) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

fn collect_files(base: &Path, dir: &Path, out: &mut Vec<(RepoPath, String)>) -> Result<(), VcsError> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let path = entry.path();
        if entry.file_type()?.is_dir() {
            collect_files(base, &path, out)?;
            continue;
        }
        let rel = path
            .strip_prefix(base)
            .expect("walked below base")
            .to_string_lossy()
            .replace('\\', "/");
        if let Ok(rp) = RepoPath::new(&rel) {
            let content = fs::read_to_string(&path)?;
            out.push((rp, content));
        }
    }
    Ok(())
}

fn encode_record(rev: &Revision, manifest: &Manifest) -> String {
    let mut out = format!(
        "revision {}\nauthor {}\ndate {}\n",
        rev.number,
        rev.author,
        rev.timestamp.to_rfc3339_opts(SecondsFormat::Nanos, true)
    );
    for p in &rev.changed_paths {
        out.push_str(&format!("changed {p}\n"));
    }
    for (p, e) in manifest {
        out.push_str(&format!("file {p} {}\n", e.digest));
    }
    out.push('\n');
    out.push_str(&rev.message);
    out
}

fn load_journal(root: &Path) -> Result<Snapshot, VcsError> {
    let mut records: Vec<(u64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(root.join("journal"))? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("rev") {
            continue;
        }
        let n = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| VcsError::Corrupt(format!("bad record name {}", path.display())))?;
        records.push((n, path));
    }
    records.sort();

    let mut snap = Snapshot::default();
    for (expected, (n, path)) in (1u64..).zip(records) {
        if n != expected {
            return Err(VcsError::Corrupt(format!("revision r{expected} is missing")));
        }
        let text = fs::read_to_string(&path)?;
        let prev = snap.manifests.last().cloned();
        let (rev, manifest) = decode_record(&text, prev.as_deref())?;
        if rev.number != n {
            return Err(VcsError::Corrupt(format!("{} holds r{}", path.display(), rev.number)));
        }
        snap.revisions.push(Arc::new(rev));
        snap.manifests.push(Arc::new(manifest));
    }
    Ok(snap)
}

fn decode_record(text: &str, prev: Option<&Manifest>) -> Result<(Revision, Manifest), VcsError> {
    let corrupt = |what: &str| VcsError::Corrupt(what.to_string());
    let (header, message) = text.split_once("\n\n").ok_or_else(|| corrupt("record without message"))?;
    let mut number = None;
    let mut author = None;
    let mut timestamp = None;
    let mut changed = Vec::new();
    let mut files = Vec::new();
    for line in header.lines() {
        let (key, value) = line.split_once(' ').ok_or_else(|| corrupt(line))?;
        match key {
            "revision" => number = value.parse::<u64>().ok(),
            "author" => author = Some(value.to_string()),
            "date" => {
                timestamp = DateTime::parse_from_rfc3339(value)
                    .ok()
                    .map(|d| d.with_timezone(&Utc))
            }
            "changed" => changed.push(RepoPath::new(value)?),
            "file" => {
                let (p, d) = value.rsplit_once(' ').ok_or_else(|| corrupt(line))?;
                files.push((RepoPath::new(p)?, d.to_string()));
            }
            _ => return Err(corrupt(line)),
        }
    }
    let number = number.ok_or_else(|| corrupt("missing revision number"))?;
    let mut manifest = Manifest::new();
    for (path, digest) in files {
        let changed_in = if changed.contains(&path) {
            number
        } else {
            prev.and_then(|m| m.get(&path))
                .map(|e| e.changed_in)
                .ok_or_else(|| corrupt("unchanged file absent from previous revision"))?
        };
        manifest.insert(path, Entry { digest, changed_in });
    }
    let rev = Revision {
        number,
        author: author.ok_or_else(|| corrupt("missing author"))?,
        timestamp: timestamp.ok_or_else(|| corrupt("missing date"))?,
        message: message.to_string(),
        changed_paths: changed,
    };
    Ok((rev, manifest))
}

#[cfg(test)]
mod tests {
    use chrono::TimeZone;

    use super::*;
    use crate::vcs::ManualClock;

    fn p(s: &str) -> RepoPath {
        RepoPath::new(s).unwrap()
    }

    #[test]
    fn header_counts_message_lines() {
        let rev = Revision {
            number: 1234,
            author: "clange".into(),
            timestamp: Utc.with_ymd_and_hms(2009, 5, 11, 11, 6, 41).unwrap(),
            message: "one\ntwo".into(),
            changed_paths: vec![],
        };
        assert_eq!(rev.header(), "r1234 | clange | 2009-05-11 11:06:41 +0000 (Mon, 11 May 2009) | 2 lines");
    }

    #[test]
    fn journal_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        {
            let repo = Repository::open(dir.path()).unwrap();
            repo.commit(&[(p("cd/a.ocd"), "v1".into()), (p("ntn/a.ntn"), "n".into())], "u", "first", 0).unwrap();
            repo.commit(&[(p("cd/a.ocd"), "v2".into())], "u", "second\nline", 1).unwrap();
        }
        let repo = Repository::open(dir.path()).unwrap();
        assert_eq!(repo.head(), 2);
        assert_eq!(repo.update(&p("cd/a.ocd"), None).unwrap(), ("v2".into(), 2));
        assert_eq!(repo.update(&p("ntn/a.ntn"), None).unwrap(), ("n".into(), 1));
        assert_eq!(repo.update(&p("cd/a.ocd"), Some(1)).unwrap().0, "v1");
        assert_eq!(repo.revision(2).unwrap().message, "second\nline");
    }

    #[test]
    fn unchanged_files_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let repo = Repository::open(dir.path()).unwrap();
        repo.commit(&[(p("cd/a.ocd"), "v1".into())], "u", "m", 0).unwrap();
        assert!(matches!(
            repo.commit(&[(p("cd/a.ocd"), "v1".into())], "u", "m", 1),
            Err(VcsError::NoChanges)
        ));
    }

    #[test]
    fn expired_lock_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let clock = Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2009, 5, 11, 0, 0, 0).unwrap()));
        let repo = Repository::open_with(dir.path(), clock.clone(), DEFAULT_LOCK_TTL).unwrap();
        repo.commit(&[(p("cd/a.ocd"), "v1".into())], "a", "m", 0).unwrap();
        repo.lock(&p("cd/a.ocd"), "a").unwrap();
        assert!(repo.lock(&p("cd/a.ocd"), "b").is_err());
        clock.advance(Duration::minutes(31));
        assert!(repo.lock_info(&p("cd/a.ocd")).is_none());
        repo.lock(&p("cd/a.ocd"), "b").unwrap();
    }
}
