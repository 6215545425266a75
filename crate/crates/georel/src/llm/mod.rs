//! Pluggable chat and embedding backends.
//!
//! The harness talks to any OpenAI-compatible HTTP service, or to the
//! deterministic mock backends, through the same two traits. Responses
//! are cached on disk keyed by (model, message hash, temperature, sample
//! index), so a warm cache makes an entire evaluation run byte-identical
//! across executions and costs nothing to re-run.

mod cache;
mod http;
mod mock;

pub use cache::DiskCache;
pub use http::{HttpChatBackend, HttpEmbeddingBackend};
pub use mock::{
    prompt_hash, ErrorSpec, GeometryAwareChat, HashEmbedding, SwapRule, TranscriptChat,
};

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Connection and sampling settings for the pluggable backends.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BackendConfig {
    pub base_url: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub chat_model: String,
    pub embed_model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub cache_dir: Option<PathBuf>,
    pub max_concurrency: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            base_url: "https://api.openai.com/v1".to_string(),
            api_key_env: "OPENAI_API_KEY".to_string(),
            chat_model: "gpt-4".to_string(),
            embed_model: "text-embedding-3-large".to_string(),
            temperature: 0.0,
            max_tokens: 1024,
            timeout_secs: 60,
            max_retries: 3,
            cache_dir: None,
            max_concurrency: 4,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::Config(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_concurrency == 0 {
            return Err(LlmError::Config("max_concurrency must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".to_string(),
            content: content.into(),
        }
    }

    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "system".to_string(),
            content: content.into(),
        }
    }
}

/// One chat interaction: the sampled response plus cache provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChatExchange {
    pub text: String,
    pub model: String,
    pub temperature: f64,
    pub sample_index: u32,
    pub cache_hit: bool,
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum LlmError {
    #[error("backend error: {0}")]
    Backend(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("response cache corrupted: {0}")]
    CacheCorruption(String),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Anything that can answer a chat prompt.
///
/// `sample_index` distinguishes repeated draws of the same prompt; it
/// participates in the cache key so repeated runs pull distinct samples.
pub trait ChatBackend: Send + Sync {
    fn model_id(&self) -> &str;
    fn complete(
        &self,
        messages: &[ChatMessage],
        temperature: f64,
        sample_index: u32,
    ) -> Result<String, LlmError>;
}

/// Anything that can vectorise a batch of texts, order-preserving.
pub trait EmbeddingBackend: Send + Sync {
    fn model_id(&self) -> &str;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, LlmError>;
}

/// Chat access with the on-disk response cache in front.
pub struct ChatClient {
    backend: Arc<dyn ChatBackend>,
    cache: Option<DiskCache>,
    temperature: f64,
}

impl ChatClient {
    pub fn new(
        backend: Arc<dyn ChatBackend>,
        config: &BackendConfig,
    ) -> Result<Self, LlmError> {
        config.validate()?;
        let cache = match &config.cache_dir {
            Some(dir) => Some(DiskCache::open(
                dir,
                &format!("chat-{}", sanitize(backend.model_id())),
            )?),
            None => None,
        };
        Ok(ChatClient {
            backend,
            cache,
            temperature: config.temperature,
        })
    }

    pub fn model_id(&self) -> &str {
        self.backend.model_id()
    }

    /// Answer a prompt; identical (model, messages, temperature, sample
    /// index) keys return the cached text without touching the backend.
    pub fn chat(
        &self,
        messages: &[ChatMessage],
        sample_index: u32,
    ) -> Result<ChatExchange, LlmError> {
        let key = chat_key(
            self.backend.model_id(),
            messages,
            self.temperature,
            sample_index,
        );
        if let Some(cache) = &self.cache {
            if let Some(text) = cache.get(&key) {
                return Ok(ChatExchange {
                    text,
                    model: self.backend.model_id().to_string(),
                    temperature: self.temperature,
                    sample_index,
                    cache_hit: true,
                });
            }
        }
        let text = self
            .backend
            .complete(messages, self.temperature, sample_index)?;
        if let Some(cache) = &self.cache {
            cache.put(&key, &text)?;
        }
        Ok(ChatExchange {
            text,
            model: self.backend.model_id().to_string(),
            temperature: self.temperature,
            sample_index,
            cache_hit: false,
        })
    }

    /// Flush any buffered cache entries to disk.
    pub fn flush(&self) -> Result<(), LlmError> {
        if let Some(cache) = &self.cache {
            cache.flush()?;
        }
        Ok(())
    }
}

/// Embedding access with per-(model, text) caching.
pub struct EmbeddingClient {
    backend: Arc<dyn EmbeddingBackend>,
    cache: Option<DiskCache>,
}

impl EmbeddingClient {
    pub fn new(
        backend: Arc<dyn EmbeddingBackend>,
        config: &BackendConfig,
    ) -> Result<Self, LlmError> {
        config.validate()?;
        let cache = match &config.cache_dir {
            Some(dir) => Some(DiskCache::open(
                dir,
                &format!("embed-{}", sanitize(backend.model_id())),
            )?),
            None => None,
        };
        Ok(EmbeddingClient { backend, cache })
    }

    pub fn model_id(&self) -> &str {
        self.backend.model_id()
    }

    /// One vector per input text, in input order. All vectors in a run
    /// must share a dimension or the batch fails.
    pub fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, LlmError> {
        let mut out: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
        let mut missing: Vec<usize> = Vec::new();
        for (i, text) in texts.iter().enumerate() {
            let key = embed_key(self.backend.model_id(), text);
            match self.cache.as_ref().and_then(|c| c.get(&key)) {
                Some(stored) => {
                    let vector: Vec<f64> = serde_json::from_str(&stored)
                        .map_err(|e| LlmError::CacheCorruption(e.to_string()))?;
                    out[i] = Some(vector);
                }
                None => missing.push(i),
            }
        }
        if !missing.is_empty() {
            let batch: Vec<String> = missing.iter().map(|i| texts[*i].clone()).collect();
            let vectors = self.backend.embed(&batch)?;
            if vectors.len() != batch.len() {
                return Err(LlmError::Backend(format!(
                    "embedding count mismatch: sent {}, got {}",
                    batch.len(),
                    vectors.len()
                )));
            }
            for (slot, vector) in missing.iter().zip(vectors) {
                if let Some(cache) = &self.cache {
                    let key = embed_key(self.backend.model_id(), &texts[*slot]);
                    cache.put(&key, &serde_json::to_string(&vector).unwrap())?;
                }
                out[*slot] = Some(vector);
            }
        }
        let vectors: Vec<Vec<f64>> = out.into_iter().map(|v| v.unwrap()).collect();
        if let Some(first) = vectors.first() {
            let expected = first.len();
            for v in &vectors {
                if v.len() != expected {
                    return Err(LlmError::DimensionMismatch {
                        expected,
                        got: v.len(),
                    });
                }
            }
        }
        Ok(vectors)
    }

    pub fn flush(&self) -> Result<(), LlmError> {
        if let Some(cache) = &self.cache {
            cache.flush()?;
        }
        Ok(())
    }
}

fn sanitize(model: &str) -> String {
    model
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

pub(crate) fn chat_key(
    model: &str,
    messages: &[ChatMessage],
    temperature: f64,
    sample_index: u32,
) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(model.as_bytes());
    hasher.update([0]);
    hasher.update(temperature.to_bits().to_le_bytes());
    hasher.update(sample_index.to_le_bytes());
    for m in messages {
        hasher.update([0]);
        hasher.update(m.role.as_bytes());
        hasher.update([0]);
        hasher.update(m.content.as_bytes());
    }
    hex::encode(hasher.finalize())
}

fn embed_key(model: &str, text: &str) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(model.as_bytes());
    hasher.update([0]);
    hasher.update(text.as_bytes());
    hex::encode(hasher.finalize())
}

/// Run `f` over the items with at most `max_concurrency` worker threads,
/// returning results in item order regardless of completion order.
pub fn run_parallel<T, R, F>(items: &[T], max_concurrency: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = max_concurrency.max(1).min(items.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = Vec::with_capacity(items.len());
    slots.resize_with(items.len(), || None);
    let slots_mutex = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let result = f(&items[i]);
                slots_mutex.lock().unwrap()[i] = Some(result);
            });
        }
    });
    slots.into_iter().map(|r| r.unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn temperature_bounds_enforced() {
        let mut config = BackendConfig::default();
        config.temperature = 2.5;
        assert!(config.validate().is_err());
        config.temperature = 0.7;
        assert!(config.validate().is_ok());
    }

    #[test]
    fn chat_key_sensitive_to_sample_index() {
        let msgs = [ChatMessage::user("hello")];
        let a = chat_key("m", &msgs, 0.0, 0);
        let b = chat_key("m", &msgs, 0.0, 1);
        assert_ne!(a, b);
        assert_eq!(a, chat_key("m", &msgs, 0.0, 0));
    }

    #[test]
    fn run_parallel_preserves_order() {
        let items: Vec<usize> = (0..100).collect();
        let out = run_parallel(&items, 7, |i| i * 2);
        assert_eq!(out, (0..100).map(|i| i * 2).collect::<Vec<_>>());
    }
}
