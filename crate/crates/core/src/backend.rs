//! Translation backend configuration, prompt rendering and the offline mocks.
//!
//! The network client lives in the `crisis-mt-backends` crate; everything here
//! is pure and usable from any target.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_PROMPT_TEMPLATE: &str =
    "Translate the following text from {src_lang} to {tgt_lang}. Reply with the translation only.\n{text}";

const PLACEHOLDERS: [&str; 3] = ["{src_lang}", "{tgt_lang}", "{text}"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    MockEcho,
    MockDictionary,
    RemoteChat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint_url: Option<String>,
    /// Name of the environment variable holding the bearer token. The token
    /// itself is never stored.
    pub auth_token_env_var: Option<String>,
    pub model_name: String,
    pub temperature: f64,
    pub prompt_template: String,
    /// Optional knowledge block prepended to every prompt.
    pub glossary: Option<String>,
    /// Token lookup table for `mock_dictionary`.
    pub dictionary: BTreeMap<String, String>,
    pub max_retries: u32,
    pub retry_base_delay_ms: u64,
    pub request_timeout_secs: u64,
    /// Requests per minute.
    pub rate_limit: u32,
    pub max_concurrency: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::MockEcho,
            endpoint_url: None,
            auth_token_env_var: None,
            model_name: "mock-echo".into(),
            temperature: 0.5,
            prompt_template: DEFAULT_PROMPT_TEMPLATE.into(),
            glossary: None,
            dictionary: BTreeMap::new(),
            max_retries: 3,
            retry_base_delay_ms: 500,
            request_timeout_secs: 60,
            rate_limit: 60,
            max_concurrency: 4,
        }
    }
}

impl BackendConfig {
    pub fn mock_dictionary(entries: impl IntoIterator<Item = (String, String)>) -> Self {
        BackendConfig {
            kind: BackendKind::MockDictionary,
            model_name: "mock-dictionary".into(),
            dictionary: entries.into_iter().collect(),
            ..BackendConfig::default()
        }
    }

    pub fn remote(endpoint_url: &str, auth_token_env_var: &str, model_name: &str) -> Self {
        BackendConfig {
            kind: BackendKind::RemoteChat,
            endpoint_url: Some(endpoint_url.into()),
            auth_token_env_var: Some(auth_token_env_var.into()),
            model_name: model_name.into(),
            ..BackendConfig::default()
        }
    }

    /// SHA-256 of the canonical JSON form; identifies a run's configuration.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Fills the template for one segment, prefixed by the glossary if set.
    pub fn render_prompt(&self, src_lang: &str, tgt_lang: &str, text: &str) -> String {
        let body = self
            .prompt_template
            .replace("{src_lang}", language_name(src_lang))
            .replace("{tgt_lang}", language_name(tgt_lang))
            .replace("{text}", text);
        match self.glossary.as_deref().filter(|g| !g.trim().is_empty()) {
            Some(glossary) => format!("Glossary:\n{glossary}\n\n{body}"),
            None => body,
        }
    }
}

/// English name for the tags used in prompts; other tags pass through.
pub fn language_name(tag: &str) -> &str {
    match tag {
        "en" => "English",
        "ga" => "Irish",
        "mr" => "Marathi",
        "ht" => "Haitian Creole",
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl ConfigIssue {
    fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigIssue {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn valid_env_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Every invariant violation, one issue per field. Empty means valid.
pub fn validate_config(cfg: &BackendConfig) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();

    if !(0.0..=2.0).contains(&cfg.temperature) {
        issues.push(ConfigIssue::new(
            "temperature",
            format!("{} is outside [0, 2]", cfg.temperature),
        ));
    }
    let missing: Vec<&str> = PLACEHOLDERS
        .into_iter()
        .filter(|p| !cfg.prompt_template.contains(p))
        .collect();
    if !missing.is_empty() {
        issues.push(ConfigIssue::new(
            "prompt_template",
            format!("missing placeholder(s) {}", missing.join(", ")),
        ));
    }
    if cfg.model_name.trim().is_empty() {
        issues.push(ConfigIssue::new("model_name", "must not be empty"));
    }
    if cfg.max_concurrency == 0 {
        issues.push(ConfigIssue::new("max_concurrency", "must be at least 1"));
    }
    if cfg.rate_limit == 0 {
        issues.push(ConfigIssue::new("rate_limit", "must be at least 1 request per minute"));
    }
    if cfg.request_timeout_secs == 0 {
        issues.push(ConfigIssue::new("request_timeout_secs", "must be at least 1 second"));
    }

    if cfg.kind == BackendKind::RemoteChat {
        match cfg.endpoint_url.as_deref() {
            None | Some("") => issues.push(ConfigIssue::new("endpoint_url", "required for remote_chat")),
            Some(raw) => match url::Url::parse(raw) {
                Ok(u) if matches!(u.scheme(), "http" | "https") && u.host().is_some() => {}
                Ok(u) => issues.push(ConfigIssue::new(
                    "endpoint_url",
                    format!("unsupported URL {u} (need http or https with a host)"),
                )),
                Err(e) => issues.push(ConfigIssue::new("endpoint_url", format!("malformed: {e}"))),
            },
        }
        match cfg.auth_token_env_var.as_deref() {
            None | Some("") => issues.push(ConfigIssue::new(
                "auth_token_env_var",
                "required for remote_chat",
            )),
            Some(name) if !valid_env_name(name) => issues.push(ConfigIssue::new(
                "auth_token_env_var",
                format!("{name:?} is not an environment variable name"),
            )),
            Some(_) => {}
        }
    }
    issues
}

/// Offline translation used by the mock backends.
pub fn mock_translate(cfg: &BackendConfig, text: &str) -> String {
    match cfg.kind {
        BackendKind::MockDictionary => text
            .split_whitespace()
            .map(|tok| cfg.dictionary.get(tok).map(String::as_str).unwrap_or(tok))
            .collect::<Vec<_>>()
            .join(" "),
        _ => text.to_owned(),
    }
}

/// Outcome for one segment. Exactly one of `hypothesis` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationResult {
    pub segment_id: String,
    pub hypothesis: Option<String>,
    pub latency_ms: u64,
    pub backend: String,
    pub error: Option<String>,
}

impl TranslationResult {
    pub fn ok(segment_id: impl Into<String>, backend: impl Into<String>, hypothesis: String, latency_ms: u64) -> Self {
        TranslationResult {
            segment_id: segment_id.into(),
            hypothesis: Some(hypothesis),
            latency_ms,
            backend: backend.into(),
            error: None,
        }
    }

    pub fn failed(segment_id: impl Into<String>, backend: impl Into<String>, error: String, latency_ms: u64) -> Self {
        TranslationResult {
            segment_id: segment_id.into(),
            hypothesis: None,
            latency_ms,
            backend: backend.into(),
            error: Some(error),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.hypothesis.is_some()
    }
}
