use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{ChatProvider, ChatRequest, ProviderError};

/// What a scripted entry answers with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reply {
    Text(String),
    /// The last non-empty line of the last user message.
    EchoLastLine,
    Fail(String),
}

impl Reply {
    pub fn text(s: impl Into<String>) -> Self {
        Reply::Text(s.into())
    }
}

/// Deterministic provider: the first entry whose matcher is a substring of
/// the request transcript wins; otherwise the default reply is used.
#[derive(Debug)]
pub struct ScriptedProvider {
    script: Vec<(String, Reply)>,
    default: Reply,
    calls: AtomicUsize,
    requests: Mutex<Vec<ChatRequest>>,
}

impl ScriptedProvider {
    pub fn new(default: Reply) -> Self {
        Self { script: Vec::new(), default, calls: AtomicUsize::new(0), requests: Mutex::new(Vec::new()) }
    }

    /// Echoes the tail of the prompt, which is the question for every prompt
    /// this crate assembles.
    pub fn echo() -> Self {
        Self::new(Reply::EchoLastLine)
    }

    pub fn with(mut self, matcher: impl Into<String>, reply: Reply) -> Self {
        self.script.push((matcher.into(), reply));
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().expect("request log poisoned").clone()
    }
}

impl ChatProvider for ScriptedProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.requests.lock().expect("request log poisoned").push(request.clone());
        let transcript = request.transcript();
        let reply = self
            .script
            .iter()
            .find(|(m, _)| transcript.contains(m.as_str()))
            .map(|(_, r)| r)
            .unwrap_or(&self.default);
        match reply {
            Reply::Text(s) => Ok(s.clone()),
            Reply::EchoLastLine => Ok(request
                .last_user()
                .and_then(|u| u.lines().rev().find(|l| !l.trim().is_empty()))
                .unwrap_or("")
                .trim()
                .to_string()),
            Reply::Fail(msg) => Err(ProviderError::Scripted(msg.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_script_uses_default() {
        let p = ScriptedProvider::new(Reply::text("default"));
        assert_eq!(p.complete(&ChatRequest::single("", "anything")).unwrap(), "default");
        assert_eq!(p.calls(), 1);
    }

    #[test]
    fn first_match_wins() {
        let p = ScriptedProvider::new(Reply::text("d"))
            .with("color", Reply::text("green"))
            .with("col", Reply::text("never"));
        assert_eq!(p.complete(&ChatRequest::single("", "favorite color?")).unwrap(), "green");
        assert_eq!(p.complete(&ChatRequest::single("", "music?")).unwrap(), "d");
    }

    #[test]
    fn echo_and_fail() {
        let p = ScriptedProvider::echo().with("boom", Reply::Fail("nope".into()));
        assert_eq!(p.complete(&ChatRequest::single("", "ctx\n\nWhere?\n")).unwrap(), "Where?");
        assert!(matches!(p.complete(&ChatRequest::single("", "boom")), Err(ProviderError::Scripted(_))));
        assert_eq!(p.requests().len(), 2);
    }
}
