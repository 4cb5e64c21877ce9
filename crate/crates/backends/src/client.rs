//! Chat-completion client: one POST per segment with retry and backoff.

use std::time::Duration;

use reqwest::StatusCode;
use serde_json::{json, Value};

use crisis_mt_core::backend::BackendConfig;

use crate::limiter::RateLimiter;

const MAX_BACKOFF: Duration = Duration::from_secs(30);

#[derive(Debug)]
enum Failure {
    Transient(String, Option<Duration>),
    Fatal(String),
}

#[derive(Debug)]
pub(crate) struct ChatClient {
    http: reqwest::Client,
    url: reqwest::Url,
    token: String,
    model: String,
    temperature: f64,
    max_retries: u32,
    base_delay: Duration,
}

impl ChatClient {
    pub(crate) fn new(cfg: &BackendConfig, url: reqwest::Url, token: String) -> Result<Self, reqwest::Error> {
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(cfg.request_timeout_secs))
            .build()?;
        Ok(ChatClient {
            http,
            url,
            token,
            model: cfg.model_name.clone(),
            temperature: cfg.temperature,
            max_retries: cfg.max_retries,
            base_delay: Duration::from_millis(cfg.retry_base_delay_ms),
        })
    }

    /// Sends `prompt`, retrying transient failures. Every attempt, including
    /// retries, takes a permit from `limiter`.
    pub(crate) async fn complete(&self, prompt: &str, limiter: &RateLimiter) -> Result<String, String> {
        let mut attempt = 0;
        loop {
            limiter.acquire().await;
            match self.send(prompt).await {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(msg)) => return Err(msg),
                Err(Failure::Transient(msg, retry_after)) => {
                    if attempt >= self.max_retries {
                        return Err(format!("{msg} (gave up after {} attempts)", attempt + 1));
                    }
                    let backoff = self.base_delay.saturating_mul(1 << attempt.min(16)).min(MAX_BACKOFF);
                    tokio::time::sleep(retry_after.map_or(backoff, |r| r.max(backoff))).await;
                    attempt += 1;
                }
            }
        }
    }

    async fn send(&self, prompt: &str) -> Result<String, Failure> {
        let body = json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        let response = self
            .http
            .post(self.url.clone())
            .bearer_auth(&self.token)
            .json(&body)
            .send()
            .await
            .map_err(classify)?;

        let status = response.status();
        if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
            let retry_after = response
                .headers()
                .get(reqwest::header::RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok())
                .map(Duration::from_secs);
            return Err(Failure::Transient(format!("endpoint returned {status}"), retry_after));
        }
        if !status.is_success() {
            let text = response.text().await.unwrap_or_default();
            let snippet: String = text.chars().take(200).collect();
            return Err(Failure::Fatal(format!("endpoint returned {status}: {snippet}")));
        }
        let value: Value = response.json().await.map_err(|e| {
            if e.is_decode() {
                Failure::Fatal(format!("response is not JSON: {e}"))
            } else {
                classify(e)
            }
        })?;
        extract_content(&value).map(str::to_owned).ok_or_else(|| {
            Failure::Fatal("response has no string at choices[0].message.content".into())
        })
    }
}

fn classify(e: reqwest::Error) -> Failure {
    if e.is_timeout() || e.is_connect() || e.is_request() || e.is_body() {
        Failure::Transient(e.to_string(), None)
    } else {
        Failure::Fatal(e.to_string())
    }
}

pub(crate) fn extract_content(value: &Value) -> Option<&str> {
    value.pointer("/choices/0/message/content")?.as_str()
}
