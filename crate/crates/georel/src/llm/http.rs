//! OpenAI-compatible HTTP backends (chat completions + embeddings).
//!
//! Any service speaking the same JSON bodies works; the three reference
//! models are interchangeable behind this client. Transient failures are
//! retried with exponential backoff bounded by a fixed ceiling.

use std::time::Duration;

use serde_json::json;

use super::{BackendConfig, ChatBackend, ChatMessage, EmbeddingBackend, LlmError};

const BACKOFF_BASE_MS: u64 = 500;
const BACKOFF_CAP_MS: u64 = 8_000;

fn resolve_api_key(config: &BackendConfig) -> Result<String, LlmError> {
    match std::env::var(&config.api_key_env) {
        Ok(key) if !key.trim().is_empty() => Ok(key),
        _ => Err(LlmError::Auth(format!(
            "environment variable {} is not set",
            config.api_key_env
        ))),
    }
}

fn build_client(config: &BackendConfig) -> Result<reqwest::blocking::Client, LlmError> {
    reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(config.timeout_secs))
        .build()
        .map_err(|e| LlmError::Config(e.to_string()))
}

/// POST with retries on transient failures (timeouts, 429, 5xx).
fn post_with_retries(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: &str,
    body: &serde_json::Value,
    max_retries: u32,
) -> Result<serde_json::Value, LlmError> {
    let mut last_error = String::new();
    for attempt in 0..=max_retries {
        if attempt > 0 {
            let backoff = (BACKOFF_BASE_MS << (attempt - 1)).min(BACKOFF_CAP_MS);
            std::thread::sleep(Duration::from_millis(backoff));
        }
        let sent = client
            .post(url)
            .bearer_auth(api_key)
            .json(body)
            .send();
        match sent {
            Ok(response) => {
                let status = response.status();
                if status == reqwest::StatusCode::UNAUTHORIZED
                    || status == reqwest::StatusCode::FORBIDDEN
                {
                    return Err(LlmError::Auth(format!("{url}: HTTP {status}")));
                }
                if status.is_success() {
                    return response
                        .json::<serde_json::Value>()
                        .map_err(|e| LlmError::Backend(format!("{url}: bad JSON: {e}")));
                }
                let retriable = status.as_u16() == 429 || status.is_server_error();
                let text = response.text().unwrap_or_default();
                last_error = format!("HTTP {status}: {}", text.chars().take(200).collect::<String>());
                if !retriable {
                    return Err(LlmError::Backend(format!("{url}: {last_error}")));
                }
            }
            Err(e) => last_error = e.to_string(),
        }
    }
    Err(LlmError::Backend(format!(
        "{url}: retries exhausted: {last_error}"
    )))
}

/// Chat completions over an OpenAI-compatible endpoint.
pub struct HttpChatBackend {
    client: reqwest::blocking::Client,
    url: String,
    api_key: String,
    model: String,
    max_tokens: u32,
    max_retries: u32,
}

impl HttpChatBackend {
    pub fn new(config: &BackendConfig) -> Result<Self, LlmError> {
        config.validate()?;
        Ok(HttpChatBackend {
            client: build_client(config)?,
            url: format!("{}/chat/completions", config.base_url.trim_end_matches('/')),
            api_key: resolve_api_key(config)?,
            model: config.chat_model.clone(),
            max_tokens: config.max_tokens,
            max_retries: config.max_retries,
        })
    }
}

impl ChatBackend for HttpChatBackend {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn complete(
        &self,
        messages: &[ChatMessage],
        temperature: f64,
        _sample_index: u32,
    ) -> Result<String, LlmError> {
        let body = json!({
            "model": self.model,
            "messages": messages,
            "temperature": temperature,
            "max_tokens": self.max_tokens,
        });
        let value = post_with_retries(
            &self.client,
            &self.url,
            &self.api_key,
            &body,
            self.max_retries,
        )?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                LlmError::Backend(format!(
                    "{}: response missing choices[0].message.content",
                    self.url
                ))
            })
    }
}

/// Embeddings over an OpenAI-compatible endpoint.
pub struct HttpEmbeddingBackend {
    client: reqwest::blocking::Client,
    url: String,
    api_key: String,
    model: String,
    max_retries: u32,
}

impl HttpEmbeddingBackend {
    pub fn new(config: &BackendConfig) -> Result<Self, LlmError> {
        config.validate()?;
        Ok(HttpEmbeddingBackend {
            client: build_client(config)?,
            url: format!("{}/embeddings", config.base_url.trim_end_matches('/')),
            api_key: resolve_api_key(config)?,
            model: config.embed_model.clone(),
            max_retries: config.max_retries,
        })
    }
}

impl EmbeddingBackend for HttpEmbeddingBackend {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, LlmError> {
        let body = json!({ "model": self.model, "input": texts });
        let value = post_with_retries(
            &self.client,
            &self.url,
            &self.api_key,
            &body,
            self.max_retries,
        )?;
        let data = value["data"]
            .as_array()
            .ok_or_else(|| LlmError::Backend(format!("{}: response missing data", self.url)))?;
        // Order by the index field rather than trusting array order.
        let mut out: Vec<Option<Vec<f64>>> = vec![None; texts.len()];
        for item in data {
            let index = item["index"].as_u64().unwrap_or(u64::MAX) as usize;
            let vector: Option<Vec<f64>> = item["embedding"]
                .as_array()
                .map(|a| a.iter().filter_map(|v| v.as_f64()).collect());
            match (vector, out.get_mut(index)) {
                (Some(v), Some(slot)) => *slot = Some(v),
                _ => {
                    return Err(LlmError::Backend(format!(
                        "{}: malformed embedding item",
                        self.url
                    )))
                }
            }
        }
        out.into_iter()
            .map(|v| v.ok_or_else(|| LlmError::Backend(format!("{}: missing embedding", self.url))))
            .collect()
    }
}
