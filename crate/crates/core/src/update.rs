//! The knowledge-update pipeline: advance the counter, merge the extracted
//! batch, then revise the contexts of concepts that have grown too long.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{split_sentences, Extractor};
use crate::kgraph::{ConceptNode, GraphStore, MergeReport};
use crate::label::Label;
use crate::provider::{ChatProvider, ChatRequest, ProviderError};

/// One-shot revision template; `{context}` is replaced by the concept's context.
pub const REVISION_TEMPLATE: &str = include_str!("../assets/revision_prompt.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RevisionPolicy {
    pub merges_per_revision: u64,
    pub max_context_chars: usize,
    pub enabled: bool,
}

impl Default for RevisionPolicy {
    fn default() -> Self {
        Self { merges_per_revision: 5, max_context_chars: 2000, enabled: true }
    }
}

impl RevisionPolicy {
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.merges_per_revision == 0 || self.max_context_chars == 0 {
            return Err(Error::InvalidArgument(
                "merges_per_revision and max_context_chars must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn is_due(&self, node: &ConceptNode) -> bool {
        if !self.enabled {
            return false;
        }
        let scheduled = node.revisions_done.saturating_mul(self.merges_per_revision);
        node.merge_count.saturating_sub(scheduled) >= self.merges_per_revision
            || node.context.chars().count() > self.max_context_chars
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionFailure {
    pub label: Label,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub t_after: u64,
    pub merge: MergeReport,
    pub revised: Vec<Label>,
    pub failures: Vec<RevisionFailure>,
}

/// Produces a shorter context for a concept.
pub trait Reviser: Send + Sync {
    fn revise(&self, node: &ConceptNode) -> std::result::Result<String, ProviderError>;
}

/// Offline reviser: keeps the last `keep` sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FallbackReviser {
    pub keep: usize,
}

impl Default for FallbackReviser {
    fn default() -> Self {
        Self { keep: 10 }
    }
}

impl Reviser for FallbackReviser {
    fn revise(&self, node: &ConceptNode) -> std::result::Result<String, ProviderError> {
        let sentences = split_sentences(&node.context);
        let skip = sentences.len().saturating_sub(self.keep);
        Ok(sentences[skip..].iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" "))
    }
}

/// Reviser backed by a chat model and the one-shot template.
pub struct ProviderReviser<P> {
    provider: P,
}

impl<P: ChatProvider> ProviderReviser<P> {
    pub fn new(provider: P) -> Self {
        Self { provider }
    }
}

impl<P: ChatProvider> Reviser for ProviderReviser<P> {
    fn revise(&self, node: &ConceptNode) -> std::result::Result<String, ProviderError> {
        revise_context(node, &self.provider)
    }
}

/// Asks `provider` for a revised context of `node`.
pub fn revise_context(node: &ConceptNode, provider: &dyn ChatProvider) -> std::result::Result<String, ProviderError> {
    if node.context.trim().is_empty() {
        return Err(ProviderError::EmptyInput);
    }
    let prompt = REVISION_TEMPLATE.replace("{context}", &node.context);
    let out = provider.complete(&ChatRequest::single("", prompt))?;
    let out = out.trim();
    if out.is_empty() {
        return Err(ProviderError::Decode("empty revision".into()));
    }
    Ok(out.to_string())
}

/// Runs one knowledge update of `text` against `store`.
///
/// The counter advances even when `text` has no nouns. Revision failures
/// leave the old context in place and are listed in the report.
pub fn knowledge_update(
    store: &mut GraphStore,
    extractor: &Extractor,
    text: &str,
    policy: &RevisionPolicy,
    reviser: &dyn Reviser,
) -> Result<UpdateReport> {
    if text.trim().is_empty() {
        return Err(Error::InvalidArgument("knowledge update text is empty".into()));
    }
    let batch = extractor.extract_concepts(text);
    batch.validate()?;
    let t_after = store.advance_counter();
    let merge = store.merge_batch(&batch)?;
    let mut report = UpdateReport { t_after, merge, ..Default::default() };

    for label in batch.concepts.keys() {
        let Some(node) = store.node(label) else { continue };
        if !policy.is_due(node) {
            continue;
        }
        match reviser.revise(node) {
            Ok(context) => {
                let node = store.node_mut(label).expect("node exists");
                node.context = context;
                node.revisions_done += 1;
                report.revised.push(label.clone());
            }
            Err(e) => {
                log::warn!("revision of {label} failed: {e}");
                report.failures.push(RevisionFailure { label: label.clone(), error: e.to_string() });
            }
        }
    }
    Ok(report)
}
