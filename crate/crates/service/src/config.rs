//! Service configuration file (TOML).
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! store = "/var/lib/crisis-mt"
//! pairs = ["en-ga", "ga-en"]
//! cors_origins = ["http://localhost:5173"]
//! snapshot_every = 100
//! records = ["runs/adaptmllm.run.json"]
//!
//! [[tokens]]
//! name = "coordinator"
//! role = "coordinator"
//! token_env = "CRISIS_COORDINATOR_TOKEN"
//!
//! [[tokens]]
//! name = "aoife"
//! role = "contributor"
//! token = "contrib-aoife-7f3a"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crisis_mt_core::LanguagePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Contributor,
    Reviewer,
    Coordinator,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Contributor => "contributor",
            Role::Reviewer => "reviewer",
            Role::Coordinator => "coordinator",
        }
    }
}

/// A bearer token, given inline or by the name of an environment variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenEntry {
    pub name: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_env: Option<String>,
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_pairs() -> Vec<LanguagePair> {
    ["en-ga", "ga-en", "en-mr", "mr-en"]
        .iter()
        .map(|p| p.parse().expect("valid pair"))
        .collect()
}

fn default_snapshot_every() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    pub store: PathBuf,
    #[serde(default = "default_pairs")]
    pub pairs: Vec<LanguagePair>,
    #[serde(default)]
    pub tokens: Vec<TokenEntry>,
    #[serde(default)]
    pub cors_origins: Vec<String>,
    /// Write a state snapshot after this many events; 0 disables snapshots.
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: u64,
    /// Baseline TSV replacing the shipped one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baselines: Option<PathBuf>,
    /// Extra leaderboard records: record JSON, record lists or run sidecars.
    #[serde(default)]
    pub records: Vec<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl ServiceConfig {
    /// Minimal config for a store directory, with no tokens.
    pub fn new(store: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            listen: default_listen(),
            store: store.into(),
            pairs: default_pairs(),
            tokens: Vec::new(),
            cors_origins: Vec::new(),
            snapshot_every: default_snapshot_every(),
            baselines: None,
            records: Vec::new(),
        }
    }

    pub fn with_token(mut self, name: &str, role: Role, token: &str) -> Self {
        self.tokens.push(TokenEntry {
            name: name.into(),
            role,
            token: Some(token.into()),
            token_env: None,
        });
        self
    }

    /// Reads a TOML file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg: ServiceConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        if let Some(base) = path.parent() {
            let resolve = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            resolve(&mut cfg.store);
            cfg.baselines.iter_mut().for_each(resolve);
            cfg.records.iter_mut().for_each(resolve);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.pairs.is_empty() {
            return Err(ConfigError::Invalid("at least one language pair is required".into()));
        }
        for t in &self.tokens {
            match (&t.token, &t.token_env) {
                (Some(_), None) | (None, Some(_)) => {}
                _ => {
                    return Err(ConfigError::Invalid(format!(
                        "token {:?}: set exactly one of token and token_env",
                        t.name
                    )))
                }
            }
        }
        Ok(())
    }

    /// `(secret, name, role)` for every token whose value is available.
    /// Tokens read from unset or empty variables are skipped.
    pub fn resolved_tokens(&self) -> Vec<(String, String, Role)> {
        self.tokens
            .iter()
            .filter_map(|t| {
                let secret = match (&t.token, &t.token_env) {
                    (Some(s), _) => Some(s.clone()),
                    (None, Some(var)) => std::env::var(var).ok(),
                    _ => None,
                }?;
                (!secret.is_empty()).then(|| (secret, t.name.clone(), t.role))
            })
            .collect()
    }
}
