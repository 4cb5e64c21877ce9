//! Translation backends and system evaluation.
//!
//! [`Translator`] runs a [`BackendConfig`] over a batch of segments: the mocks
//! resolve locally, `remote_chat` sends one chat-completion request per
//! segment with bounded concurrency, a shared rate limiter and retries.
//! [`evaluate_system`] scores a backend on a test set and produces a
//! leaderboard record.

mod client;
mod evaluate;
mod limiter;

use std::time::{Duration, Instant};

use futures::stream::{self, StreamExt};

use crisis_mt_core::backend::{mock_translate, validate_config, BackendConfig, BackendKind, ConfigIssue, TranslationResult};
use crisis_mt_core::{LanguagePair, Segment};

pub use evaluate::{evaluate_system, evaluate_with, testset_fingerprint, EvalError, Evaluation, RunFiles, RunSidecar};
pub use limiter::RateLimiter;

use client::ChatClient;

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("invalid backend config: {}", join_issues(.0))]
    InvalidConfig(Vec<ConfigIssue>),
    #[error("malformed endpoint URL: {0}")]
    MalformedUrl(String),
    #[error("environment variable {0} holding the auth token is not set")]
    MissingToken(String),
    #[error("no segments to translate")]
    EmptyBatch,
    #[error("segment {index} is {found}, batch is {expected}")]
    MixedPairs {
        index: usize,
        expected: LanguagePair,
        found: LanguagePair,
    },
    #[error("could not build HTTP client: {0}")]
    Client(String),
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

enum Engine {
    Mock,
    Remote(ChatClient),
}

pub struct Translator {
    cfg: BackendConfig,
    engine: Engine,
    limiter: RateLimiter,
}

impl Translator {
    /// Validates `cfg` and, for `remote_chat`, resolves the bearer token from
    /// the named environment variable.
    pub fn new(cfg: &BackendConfig) -> Result<Self, BackendError> {
        let issues = validate_config(cfg);
        if let Some(issue) = issues.iter().find(|i| i.field == "endpoint_url") {
            return Err(BackendError::MalformedUrl(issue.message.clone()));
        }
        if !issues.is_empty() {
            return Err(BackendError::InvalidConfig(issues));
        }
        let engine = match cfg.kind {
            BackendKind::MockEcho | BackendKind::MockDictionary => Engine::Mock,
            BackendKind::RemoteChat => {
                let raw = cfg.endpoint_url.as_deref().unwrap_or_default();
                let url = reqwest::Url::parse(raw).map_err(|e| BackendError::MalformedUrl(format!("{raw}: {e}")))?;
                let var = cfg.auth_token_env_var.clone().unwrap_or_default();
                let token = std::env::var(&var)
                    .ok()
                    .filter(|t| !t.is_empty())
                    .ok_or(BackendError::MissingToken(var))?;
                let client = ChatClient::new(cfg, url, token).map_err(|e| BackendError::Client(e.to_string()))?;
                Engine::Remote(client)
            }
        };
        Ok(Translator {
            cfg: cfg.clone(),
            engine,
            limiter: RateLimiter::per_minute(cfg.rate_limit),
        })
    }

    /// Replaces the one-minute limiter window, keeping `rate_limit` permits.
    pub fn with_rate_window(mut self, window: Duration) -> Self {
        self.limiter = RateLimiter::new(self.cfg.rate_limit, window);
        self
    }

    pub fn config(&self) -> &BackendConfig {
        &self.cfg
    }

    /// One result per segment, in input order. Per-segment failures become
    /// error results; only precondition violations fail the whole batch.
    pub async fn translate_batch(&self, segments: &[Segment]) -> Result<Vec<TranslationResult>, BackendError> {
        let first = segments.first().ok_or(BackendError::EmptyBatch)?;
        if let Some((index, s)) = segments.iter().enumerate().find(|(_, s)| s.pair != first.pair) {
            return Err(BackendError::MixedPairs {
                index,
                expected: first.pair.clone(),
                found: s.pair.clone(),
            });
        }
        let results = stream::iter(segments)
            .map(|segment| self.translate_one(segment))
            .buffered(self.cfg.max_concurrency)
            .collect()
            .await;
        Ok(results)
    }

    async fn translate_one(&self, segment: &Segment) -> TranslationResult {
        let started = Instant::now();
        let outcome = match &self.engine {
            Engine::Mock => Ok(mock_translate(&self.cfg, &segment.source_text)),
            Engine::Remote(client) => {
                let prompt = self
                    .cfg
                    .render_prompt(segment.pair.source(), segment.pair.target(), &segment.source_text);
                client.complete(&prompt, &self.limiter).await
            }
        };
        let latency_ms = started.elapsed().as_millis() as u64;
        match outcome {
            Ok(text) => TranslationResult::ok(&segment.id, &self.cfg.model_name, text, latency_ms),
            Err(msg) => TranslationResult::failed(&segment.id, &self.cfg.model_name, msg, latency_ms),
        }
    }
}

/// Convenience wrapper: build a [`Translator`] for `cfg` and run one batch.
pub async fn translate_batch(cfg: &BackendConfig, segments: &[Segment]) -> Result<Vec<TranslationResult>, BackendError> {
    Translator::new(cfg)?.translate_batch(segments).await
}
