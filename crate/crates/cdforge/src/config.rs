//! Service configuration: port, lock lifetime, namespace IRIs and the static
//! token table.
//!
//! ```toml
//! port = 8080
//! lock_ttl_minutes = 30
//! reject_unknown_roles = false
//!
//! [namespaces]
//! ikewiki = "http://wiki.example.org/ns#"
//!
//! [[tokens]]
//! token = "s3cret"
//! user = "anna"
//! role = "cd-editor"
//! ```

use std::collections::HashMap;
use std::path::Path;

use cdforge_core::graph::Namespaces;
use cdforge_core::om::{ParseOptions, RolePolicy};
use serde::Deserialize;

/// Access levels, each including the ones below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Visitor,
    CdEditor,
    Administrator,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Visitor => "visitor",
            Role::CdEditor => "cd-editor",
            Role::Administrator => "administrator",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct TokenEntry {
    pub token: String,
    pub user: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Principal {
    pub user: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub port: u16,
    pub lock_ttl_minutes: i64,
    /// Refuse CDs whose symbols carry a role outside the known set instead
    /// of reporting a warning.
    pub reject_unknown_roles: bool,
    pub namespaces: Namespaces,
    pub tokens: Vec<TokenEntry>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            port: 8080,
            lock_ttl_minutes: 30,
            reject_unknown_roles: false,
            namespaces: Namespaces::default(),
            tokens: Vec::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let c: Config = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Config::parse(&text)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.lock_ttl_minutes <= 0 {
            return Err(ConfigError::Invalid("lock_ttl_minutes must be positive".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &self.tokens {
            if t.token.is_empty() || t.user.trim().is_empty() {
                return Err(ConfigError::Invalid("tokens need a non-empty token and user".into()));
            }
            if !seen.insert(t.token.as_str()) {
                return Err(ConfigError::Invalid(format!("token for {} is listed twice", t.user)));
            }
        }
        Ok(())
    }

    pub fn lock_ttl(&self) -> chrono::Duration {
        chrono::Duration::minutes(self.lock_ttl_minutes)
    }

    pub fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            unknown_role: if self.reject_unknown_roles { RolePolicy::Reject } else { RolePolicy::Warn },
        }
    }

    pub fn principals(&self) -> HashMap<String, Principal> {
        self.tokens
            .iter()
            .map(|t| {
                (
                    t.token.clone(),
                    Principal {
                        user: t.user.clone(),
                        role: t.role,
                    },
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_token_table() {
        let c = Config::parse(
            r#"
port = 9000
[namespaces]
omo = "urn:omo#"
[[tokens]]
token = "t1"
user = "anna"
role = "administrator"
[[tokens]]
token = "t2"
user = "ben"
role = "visitor"
"#,
        )
        .unwrap();
        assert_eq!(c.port, 9000);
        assert_eq!(c.lock_ttl_minutes, 30);
        assert!(matches!(c.parse_options().unknown_role, RolePolicy::Warn));
        assert_eq!(c.namespaces.omo, "urn:omo#");
        assert_eq!(c.namespaces.sioc, Namespaces::default().sioc);
        let p = c.principals();
        assert_eq!(p["t1"].role, Role::Administrator);
        assert!(Role::Administrator > Role::CdEditor && Role::CdEditor > Role::Visitor);
    }

    #[test]
    fn rejects_duplicates_and_unknown_roles() {
        let dup = "[[tokens]]\ntoken='a'\nuser='x'\nrole='visitor'\n[[tokens]]\ntoken='a'\nuser='y'\nrole='visitor'\n";
        assert!(matches!(Config::parse(dup), Err(ConfigError::Invalid(_))));
        assert!(Config::parse("[[tokens]]\ntoken='a'\nuser='x'\nrole='root'\n").is_err());
        assert!(Config::parse("lock_ttl_minutes = 0").is_err());
        assert!(Config::parse("colour = 'blue'").is_err());
    }
}
