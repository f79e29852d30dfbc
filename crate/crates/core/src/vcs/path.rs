use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::VcsError;

/// File kinds the store accepts, by extension.
pub const EXTENSIONS: &[&str] = &["ocd", "sts", "ntn"];

/// A repository-relative file path such as `cd/arith1.ocd`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RepoPath(String);

impl RepoPath {
    pub fn new(path: &str) -> Result<Self, VcsError> {
        let bad = || VcsError::InvalidPath(path.to_string());
        if path.is_empty() || path.starts_with('/') || path.contains('\\') {
            return Err(bad());
        }
        if path
            .split('/')
            .any(|seg| seg.is_empty() || seg == "." || seg == "..")
        {
            return Err(bad());
        }
        let ext = path.rsplit_once('.').map(|(_, e)| e).ok_or_else(bad)?;
        if !EXTENSIONS.contains(&ext) || path.ends_with(&format!("/.{ext}")) || path == format!(".{ext}") {
            return Err(bad());
        }
        Ok(RepoPath(path.to_string()))
    }

    /// `cd/<name>.ocd`
    pub fn cd(name: &str) -> Result<Self, VcsError> {
        RepoPath::new(&format!("cd/{name}.ocd"))
    }

    /// `ntn/<name>.ntn`
    pub fn notation(name: &str) -> Result<Self, VcsError> {
        RepoPath::new(&format!("ntn/{name}.ntn"))
    }

    /// `sts/<name>.sts`
    pub fn signatures(name: &str) -> Result<Self, VcsError> {
        RepoPath::new(&format!("sts/{name}.sts"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn extension(&self) -> &str {
        self.0.rsplit_once('.').map(|(_, e)| e).unwrap_or("")
    }

    /// File name without directory and extension.
    pub fn stem(&self) -> &str {
        let file = self.0.rsplit('/').next().unwrap_or(&self.0);
        file.rsplit_once('.').map(|(s, _)| s).unwrap_or(file)
    }
}

impl fmt::Display for RepoPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for RepoPath {
    type Err = VcsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RepoPath::new(s)
    }
}

impl Serialize for RepoPath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for RepoPath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        RepoPath::new(&String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_repository_files() {
        for p in ["cd/arith1.ocd", "sts/arith1.sts", "ntn/arith1.ntn", "top.ocd"] {
            assert!(RepoPath::new(p).is_ok(), "{p}");
        }
        assert_eq!(RepoPath::cd("arith1").unwrap().stem(), "arith1");
    }

    #[test]
    fn rejects_escapes_and_other_files() {
        for p in ["../x.ocd", "cd/../x.ocd", "/abs.ocd", "cd//x.ocd", "cd/x.txt", "cd/x", "", "cd/.ocd", "./a.ocd"] {
            assert!(RepoPath::new(p).is_err(), "{p}");
        }
    }
}
