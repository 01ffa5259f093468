//! OpenAI-compatible chat-completions backend.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::cache::{cache_key, TranscriptCache};
use super::parse::parse_response;
use super::prompt::{build_prompt, system_prompt};
use super::{BackendError, DetectorBackend, Pricing, Usage};
use crate::labels::LabelSet;

pub const API_KEY_ENV: &str = "LATEXPOSED_API_KEY";
pub const ENDPOINT_ENV: &str = "LATEXPOSED_ENDPOINT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteModelConfig {
    /// Full chat-completions URL.
    pub endpoint: String,
    pub model: String,
    pub max_parallel: usize,
    pub max_attempts: u32,
    /// First retry delay; each further retry doubles it.
    pub backoff_base_ms: u64,
    pub timeout_secs: u64,
    #[serde(with = "rust_decimal::serde::str")]
    pub price_per_m_input: Decimal,
    #[serde(with = "rust_decimal::serde::str_option")]
    pub price_per_m_output: Option<Decimal>,
}

impl Default for RemoteModelConfig {
    fn default() -> Self {
        RemoteModelConfig {
            endpoint: "https://openrouter.ai/api/v1/chat/completions".into(),
            model: "qwen/qwen-2.5-72b-instruct".into(),
            max_parallel: 8,
            max_attempts: 4,
            backoff_base_ms: 500,
            timeout_secs: 120,
            price_per_m_input: Decimal::new(7, 2),
            price_per_m_output: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RemoteConfigError {
    #[error("max_parallel must be at least 1")]
    NoParallelism,
    #[error("max_attempts must be at least 1")]
    NoAttempts,
    #[error("environment variable {0} is not set")]
    MissingCredential(&'static str),
}

impl RemoteModelConfig {
    pub fn validate(&self) -> Result<(), RemoteConfigError> {
        if self.max_parallel == 0 {
            return Err(RemoteConfigError::NoParallelism);
        }
        if self.max_attempts == 0 {
            return Err(RemoteConfigError::NoAttempts);
        }
        Ok(())
    }

    /// Applies the endpoint override from the environment.
    pub fn with_env_overrides(mut self) -> Self {
        if let Ok(e) = std::env::var(ENDPOINT_ENV) {
            if !e.trim().is_empty() {
                self.endpoint = e.trim().to_string();
            }
        }
        self
    }

    /// Delay before retry `k` (1-based): `base * 2^(k-1)`. Strictly increasing.
    pub fn backoff(&self, k: u32) -> Duration {
        Duration::from_millis(self.backoff_base_ms.max(1).saturating_mul(1u64 << (k - 1).min(20)))
    }
}

/// Reads the credential from the environment.
pub fn api_key_from_env() -> Result<String, RemoteConfigError> {
    match std::env::var(API_KEY_ENV) {
        Ok(k) if !k.trim().is_empty() => Ok(k.trim().to_string()),
        _ => Err(RemoteConfigError::MissingCredential(API_KEY_ENV)),
    }
}

/// Counting semaphore that also records the peak number of holders.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(n: usize) -> Self {
        Gate { free: Mutex::new(n), cv: Condvar::new(), in_flight: AtomicUsize::new(0), peak: AtomicUsize::new(0) }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("gate lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("gate lock");
        }
        *free -= 1;
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        self.0.in_flight.fetch_sub(1, Ordering::SeqCst);
        *self.0.free.lock().expect("gate lock") += 1;
        self.0.cv.notify_one();
    }
}

enum Attempt {
    Done(String, u64, u64),
    Retry(String),
    Fatal(BackendError),
}

pub struct RemoteBackend {
    config: RemoteModelConfig,
    api_key: String,
    client: reqwest::blocking::Client,
    cache: Option<Arc<TranscriptCache>>,
    gate: Gate,
    requests: AtomicU64,
    input_tokens: AtomicU64,
    output_tokens: AtomicU64,
}

impl RemoteBackend {
    pub fn new(
        config: RemoteModelConfig,
        api_key: String,
        cache: Option<Arc<TranscriptCache>>,
    ) -> Result<Self, BackendError> {
        config.validate().map_err(|e| BackendError::Config(e.to_string()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        let gate = Gate::new(config.max_parallel);
        Ok(RemoteBackend {
            config,
            api_key,
            client,
            cache,
            gate,
            requests: AtomicU64::new(0),
            input_tokens: AtomicU64::new(0),
            output_tokens: AtomicU64::new(0),
        })
    }

    /// HTTP requests sent so far, retries included.
    pub fn requests_sent(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn peak_in_flight(&self) -> usize {
        self.gate.peak.load(Ordering::SeqCst)
    }

    pub fn config(&self) -> &RemoteModelConfig {
        &self.config
    }

    fn attempt(&self, system: &str, prompt: &str) -> Attempt {
        let body = json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": prompt},
            ],
        });
        let _permit = self.gate.acquire();
        self.requests.fetch_add(1, Ordering::SeqCst);
        let resp = match self.client.post(&self.config.endpoint).bearer_auth(&self.api_key).json(&body).send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(format!("transport: {e}")),
        };
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Attempt::Retry(format!("HTTP {status}"));
        }
        if !status.is_success() {
            return Attempt::Fatal(BackendError::Http(status.as_u16()));
        }
        let v: serde_json::Value = match resp.json() {
            Ok(v) => v,
            Err(e) => return Attempt::Retry(format!("response body: {e}")),
        };
        let Some(content) = v.pointer("/choices/0/message/content").and_then(|c| c.as_str()) else {
            return Attempt::Retry("response has no choices[0].message.content".into());
        };
        let usage = |k: &str| v.pointer(&format!("/usage/{k}")).and_then(|x| x.as_u64()).unwrap_or(0);
        Attempt::Done(content.to_string(), usage("prompt_tokens"), usage("completion_tokens"))
    }
}

impl DetectorBackend for RemoteBackend {
    fn name(&self) -> &str {
        &self.config.model
    }

    fn pricing(&self) -> Pricing {
        Pricing { input_per_m: self.config.price_per_m_input, output_per_m: self.config.price_per_m_output }
    }

    fn usage(&self) -> Usage {
        Usage {
            input_tokens: self.input_tokens.load(Ordering::SeqCst),
            output_tokens: self.output_tokens.load(Ordering::SeqCst),
        }
    }

    /// Cached responses are reused. A response that does not parse is
    /// retried like a transport failure; after the last attempt the batch
    /// fails rather than yielding guessed labels.
    fn classify(&self, snippets: &[&str]) -> Result<Vec<LabelSet>, BackendError> {
        let prompt = build_prompt(snippets).map_err(|e| BackendError::Config(e.to_string()))?;
        let system = system_prompt();
        let key = cache_key(&self.config.model, &system, &prompt);
        if let Some(text) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            if let Ok(sets) = parse_response(&text, snippets.len()) {
                return Ok(sets);
            }
        }
        let mut last = String::new();
        for k in 1..=self.config.max_attempts {
            if k > 1 {
                std::thread::sleep(self.config.backoff(k - 1));
            }
            match self.attempt(&system, &prompt) {
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(why) => last = why,
                Attempt::Done(text, pin, pout) => {
                    self.input_tokens.fetch_add(pin, Ordering::SeqCst);
                    self.output_tokens.fetch_add(pout, Ordering::SeqCst);
                    match parse_response(&text, snippets.len()) {
                        Ok(sets) => {
                            if let Some(c) = &self.cache {
                                if let Err(e) = c.insert(&key, &self.config.model, &text) {
                                    log::warn!("transcript cache: {e}");
                                }
                            }
                            return Ok(sets);
                        }
                        Err(e) => last = format!("unparsed response: {e}"),
                    }
                }
            }
            log::debug!("attempt {k}/{} failed: {last}", self.config.max_attempts);
        }
        Err(BackendError::Exhausted { attempts: self.config.max_attempts, last })
    }
}
