use std::time::Duration;

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

use super::{ChatProvider, ChatRequest, EmbeddingProvider, ProviderError, Role};

pub const ENV_API_BASE: &str = "RECALL_API_BASE";
pub const ENV_API_KEY: &str = "RECALL_API_KEY";
pub const ENV_MODEL: &str = "RECALL_MODEL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    /// Base URL, e.g. `https://api.example.com/v1`.
    pub base_url: String,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub model: String,
    pub embedding_model: String,
    pub chat_path: String,
    pub embeddings_path: String,
    pub timeout_secs: u64,
    pub max_attempts: u32,
    pub backoff_ms: u64,
    /// Expected embedding dimension, checked on every response when set.
    pub embedding_dim: Option<usize>,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            base_url: String::new(),
            api_key: None,
            model: "gpt-3.5-turbo".into(),
            embedding_model: "text-embedding-3-small".into(),
            chat_path: "/chat/completions".into(),
            embeddings_path: "/embeddings".into(),
            timeout_secs: 60,
            max_attempts: 3,
            backoff_ms: 500,
            embedding_dim: None,
        }
    }
}

impl RemoteConfig {
    /// Reads `RECALL_API_BASE`, `RECALL_API_KEY` and `RECALL_MODEL`. Returns
    /// `None` when no base URL is set.
    pub fn from_env() -> Option<Self> {
        let base = std::env::var(ENV_API_BASE).ok().filter(|s| !s.trim().is_empty())?;
        let mut cfg = RemoteConfig { base_url: base, ..Default::default() };
        cfg.apply_env();
        Some(cfg)
    }

    /// Overlays key and model from the environment when present.
    pub fn apply_env(&mut self) {
        if let Ok(base) = std::env::var(ENV_API_BASE) {
            if !base.trim().is_empty() {
                self.base_url = base;
            }
        }
        if let Ok(key) = std::env::var(ENV_API_KEY) {
            self.api_key = Some(key);
        }
        if let Ok(model) = std::env::var(ENV_MODEL) {
            self.model = model;
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base_url.trim_end_matches('/'), path)
    }
}

/// Blocking client for a chat-completions compatible endpoint.
///
/// Retries 5xx responses and transport failures with exponential backoff;
/// 4xx responses fail immediately.
#[derive(Debug, Clone)]
pub struct RemoteProvider {
    cfg: RemoteConfig,
    client: Client,
}

#[derive(Serialize)]
struct WireChatRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: Role,
    content: &'a str,
}

#[derive(Deserialize)]
struct WireChatResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireResponseMessage,
}

#[derive(Deserialize)]
struct WireResponseMessage {
    content: Option<String>,
}

#[derive(Serialize)]
struct WireEmbeddingRequest<'a> {
    model: &'a str,
    input: &'a str,
}

#[derive(Deserialize)]
struct WireEmbeddingResponse {
    data: Vec<WireEmbedding>,
}

#[derive(Deserialize)]
struct WireEmbedding {
    embedding: Vec<f64>,
}

const EXCERPT_CHARS: usize = 200;

impl RemoteProvider {
    pub fn new(cfg: RemoteConfig) -> Result<Self, ProviderError> {
        if cfg.base_url.trim().is_empty() {
            return Err(ProviderError::Config(format!("no base URL (set {ENV_API_BASE})")));
        }
        if cfg.max_attempts == 0 {
            return Err(ProviderError::Config("max_attempts must be at least 1".into()));
        }
        let client = Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(Self { cfg, client })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.cfg
    }

    fn post<B: Serialize>(&self, path: &str, body: &B) -> Result<String, ProviderError> {
        let url = self.cfg.url(path);
        let mut last = String::new();
        for attempt in 1..=self.cfg.max_attempts {
            if attempt > 1 {
                let wait = self.cfg.backoff_ms.saturating_mul(1 << (attempt - 2).min(16));
                std::thread::sleep(Duration::from_millis(wait));
            }
            let mut req = self.client.post(&url).json(body);
            if let Some(key) = &self.cfg.api_key {
                req = req.bearer_auth(key);
            }
            match req.send() {
                Ok(resp) => {
                    let status = resp.status();
                    let text = resp.text().map_err(|e| ProviderError::Transport(e.to_string()))?;
                    if status.is_success() {
                        return Ok(text);
                    }
                    let excerpt: String = text.chars().take(EXCERPT_CHARS).collect();
                    if status.is_server_error() {
                        log::warn!("{url}: HTTP {status} on attempt {attempt}");
                        last = format!("HTTP {}: {excerpt}", status.as_u16());
                        continue;
                    }
                    return Err(ProviderError::Http { status: status.as_u16(), excerpt });
                }
                Err(e) if e.is_timeout() || e.is_connect() || e.is_request() => {
                    log::warn!("{url}: {e} on attempt {attempt}");
                    last = e.to_string();
                }
                Err(e) => return Err(ProviderError::Transport(e.to_string())),
            }
        }
        Err(ProviderError::Timeout { attempts: self.cfg.max_attempts, last })
    }
}

impl ChatProvider for RemoteProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        if request.messages.is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        let mut messages = Vec::with_capacity(request.messages.len() + 1);
        if !request.system.is_empty() {
            messages.push(WireMessage { role: Role::System, content: &request.system });
        }
        messages.extend(request.messages.iter().map(|m| WireMessage { role: m.role, content: &m.content }));
        let body = WireChatRequest {
            model: &self.cfg.model,
            messages,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
        };
        let text = self.post(&self.cfg.chat_path, &body)?;
        let resp: WireChatResponse =
            serde_json::from_str(&text).map_err(|e| ProviderError::Decode(e.to_string()))?;
        resp.choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| ProviderError::Decode("response has no choices[0].message.content".into()))
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::EmptyInput);
        }
        let body = WireEmbeddingRequest { model: &self.cfg.embedding_model, input: text };
        let raw = self.post(&self.cfg.embeddings_path, &body)?;
        let resp: WireEmbeddingResponse =
            serde_json::from_str(&raw).map_err(|e| ProviderError::Decode(e.to_string()))?;
        let v = resp
            .data
            .into_iter()
            .next()
            .map(|d| d.embedding)
            .ok_or_else(|| ProviderError::Decode("response has no data[0].embedding".into()))?;
        if let Some(expected) = self.cfg.embedding_dim {
            if v.len() != expected {
                return Err(ProviderError::Dimension { expected, found: v.len() });
            }
        }
        Ok(v)
    }
}
