//! Chat-completion and embedding backends.
//!
//! [`RemoteProvider`] speaks the chat-completions JSON wire format over HTTP;
//! [`ScriptedProvider`] answers from a fixed script so every provider-touching
//! path runs offline.

mod remote;
mod scripted;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use remote::{RemoteConfig, RemoteProvider, ENV_API_BASE, ENV_API_KEY, ENV_MODEL};
pub use scripted::{Reply, ScriptedProvider};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider returned HTTP {status}: {excerpt}")]
    Http { status: u16, excerpt: String },
    #[error("provider unavailable after {attempts} attempts: {last}")]
    Timeout { attempts: u32, last: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("cannot decode provider response: {0}")]
    Decode(String),
    #[error("provider misconfigured: {0}")]
    Config(String),
    #[error("empty input")]
    EmptyInput,
    #[error("embedding has dimension {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("scripted failure: {0}")]
    Scripted(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    /// System preamble; sent as a leading system message when non-empty.
    pub system: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub const DEFAULT_MAX_TOKENS: u32 = 512;

    /// A single-turn request at temperature 0.
    pub fn single(system: impl Into<String>, user: impl Into<String>) -> Self {
        Self {
            system: system.into(),
            messages: vec![ChatMessage::user(user)],
            temperature: 0.0,
            max_tokens: Self::DEFAULT_MAX_TOKENS,
        }
    }

    /// Every piece of text in the request, in order. Script matchers run
    /// against this.
    pub fn transcript(&self) -> String {
        let mut out = self.system.clone();
        for m in &self.messages {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&m.content);
        }
        out
    }

    pub fn last_user(&self) -> Option<&str> {
        self.messages.iter().rev().find(|m| m.role == Role::User).map(|m| m.content.as_str())
    }
}

pub trait ChatProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError>;
}

pub trait EmbeddingProvider: Send + Sync {
    /// Raw (unnormalized) embedding of `text`.
    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError>;
}

impl<T: ChatProvider + ?Sized> ChatProvider for std::sync::Arc<T> {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        (**self).complete(request)
    }
}

impl<T: ChatProvider + ?Sized> ChatProvider for &T {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        (**self).complete(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcript_and_last_user() {
        let mut r = ChatRequest::single("sys", "hello");
        r.messages.push(ChatMessage::assistant("hi"));
        assert_eq!(r.transcript(), "sys\nhello\nhi");
        assert_eq!(r.last_user(), Some("hello"));
        assert_eq!(r.temperature, 0.0);
    }
}
