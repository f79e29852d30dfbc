//! Embedded versioned file store: an append-only revision journal plus
//! content-addressed file bodies, with update / commit / lock semantics.

mod clock;
mod path;
mod repo;

use thiserror::Error;

use crate::fragment::FragmentId;

pub use clock::{Clock, ManualClock, SystemClock};
pub use path::{RepoPath, EXTENSIONS};
pub use repo::{LockInfo, LockToken, Repository, Revision, DEFAULT_LOCK_TTL};

#[derive(Debug, Error)]
pub enum VcsError {
    #[error("'{0}' is not a valid repository path")]
    InvalidPath(String),
    #[error("commit contains no files")]
    EmptyCommit,
    #[error("commit message is empty")]
    EmptyMessage,
    #[error("commit changes nothing")]
    NoChanges,
    #[error("{path} changed in r{head} since the base revision")]
    Conflict { path: RepoPath, head: u64 },
    #[error("{path} is locked by {user}")]
    LockHeld { path: RepoPath, user: String },
    #[error("unknown lock token")]
    UnknownLock,
    #[error("{0} not found")]
    NotFound(RepoPath),
    #[error("no revision r{0}")]
    NoSuchRevision(u64),
    #[error("repository journal is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl VcsError {
    pub fn code(&self) -> &'static str {
        match self {
            VcsError::InvalidPath(_) => "InvalidPath",
            VcsError::EmptyCommit => "EmptyCommit",
            VcsError::EmptyMessage => "EmptyMessage",
            VcsError::NoChanges => "NoChanges",
            VcsError::Conflict { .. } => "Conflict",
            VcsError::LockHeld { .. } => "LockHeld",
            VcsError::UnknownLock => "UnknownLock",
            VcsError::NotFound(_) => "NotFound",
            VcsError::NoSuchRevision(_) => "NoSuchRevision",
            VcsError::Corrupt(_) => "Corrupt",
            VcsError::Io(_) => "IoError",
        }
    }
}

/// The two-line commit message recorded for a fragment edit.
pub fn build_log_message(user: &str, summary: &str, fragment: &FragmentId) -> Result<String, VcsError> {
    let summary = summary.trim();
    if summary.is_empty() {
        return Err(VcsError::EmptyMessage);
    }
    Ok(format!("[{user}@SWiM] {summary}\nActually changed fragment {fragment}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_message_template() {
        let id: FragmentId = "cd:arith1+plus+ex1".parse().unwrap();
        assert_eq!(
            build_log_message("u", "edited example", &id).unwrap(),
            "[u@SWiM] edited example\nActually changed fragment cd:arith1+plus+ex1"
        );
        assert!(matches!(build_log_message("u", " ", &id), Err(VcsError::EmptyMessage)));
    }
}
