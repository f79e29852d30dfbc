//! HTTP service and command-line front end.

pub mod config;
pub mod service;

use std::path::Path;
use std::sync::Arc;

use cdforge_core::wiki::{Wiki, WikiConfig, WikiError};

pub use config::{Config, Principal, Role};
pub use service::{router, ApiError, AppState};

/// Open (or create) the repository at `repo` with the configured namespaces
/// and lock lifetime.
pub fn open_wiki(repo: &Path, config: &Config) -> Result<Wiki, WikiError> {
    Wiki::open_with(
        repo,
        WikiConfig {
            namespaces: config.namespaces.clone(),
            lock_ttl: config.lock_ttl(),
            parse: config.parse_options(),
            ..WikiConfig::default()
        },
    )
}

pub fn app(wiki: Wiki, config: &Config) -> axum::Router {
    router(Arc::new(AppState::new(wiki, config.principals())))
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/http-api.md")]
    mod http_api {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
