//! Question answering over the concept graph.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::Extractor;
use crate::kgraph::{GraphStore, Relation, TemporalWindow};
use crate::label::Label;
use crate::num::Scalar;
use crate::provider::{ChatProvider, ChatRequest};

/// Sentence placed ahead of the retrieved contexts.
pub const CHRONOLOGY_PREFIX: &str = "each sentence in the following statements is true when read in chronological order";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct RetrievalConfig<F> {
    pub max_prompt_concepts: usize,
    pub max_distance: usize,
    pub alpha: F,
    pub window: TemporalWindow,
}

impl<F: Scalar> Default for RetrievalConfig<F> {
    fn default() -> Self {
        Self {
            max_prompt_concepts: 10,
            max_distance: 2,
            alpha: F::from_count(3),
            window: TemporalWindow::default(),
        }
    }
}

impl<F: Scalar> RetrievalConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.max_prompt_concepts == 0 {
            return Err(Error::InvalidArgument("max_prompt_concepts must be positive".into()));
        }
        if self.max_distance == 0 {
            return Err(Error::InvalidArgument("max_distance must be positive".into()));
        }
        if self.alpha.is_nan() || self.alpha < F::zero() {
            return Err(Error::InvalidArgument("alpha must be a non-negative number".into()));
        }
        Ok(())
    }
}

/// A relation as recorded in traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationRef {
    pub a: Label,
    pub b: Label,
    pub strength: u64,
    pub t: u64,
}

impl From<&Relation> for RelationRef {
    fn from(r: &Relation) -> Self {
        Self { a: r.a.clone(), b: r.b.clone(), strength: r.strength, t: r.temporal_index }
    }
}

/// One member of the prompt set. Essentials carry no score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct PromptEntry<F> {
    pub label: Label,
    pub essential: bool,
    pub score: Option<F>,
    pub relation: Option<RelationRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RetrievalTrace<F> {
    pub question: String,
    pub essentials_requested: Vec<Label>,
    pub essentials_found: Vec<Label>,
    pub prompt_set: Vec<PromptEntry<F>>,
    pub assembled_context: String,
    pub answer: Option<String>,
    pub error: Option<String>,
}

pub fn essential_labels(extractor: &Extractor, question: &str) -> Vec<Label> {
    extractor.essential_labels(question)
}

fn score_of<F: Scalar>(rel: &Relation, alpha: F) -> F {
    crate::kgraph::relation_score(rel, alpha)
}

/// Higher score first, then higher relation index.
fn better<F: Scalar>(x: &Relation, y: &Relation, alpha: F) -> Ordering {
    score_of(x, alpha)
        .partial_cmp(&score_of(y, alpha))
        .unwrap_or(Ordering::Equal)
        .then(x.temporal_index.cmp(&y.temporal_index))
}

/// The ordered concept list `P`: found essentials in question order, then
/// neighbors by `strength + α·T(E)` descending, ties to the higher `T(E)`,
/// then the smaller label. At most `max_prompt_concepts` entries.
pub fn build_prompt_set<F: Scalar>(
    store: &GraphStore,
    essentials: &[Label],
    cfg: &RetrievalConfig<F>,
) -> Result<Vec<PromptEntry<F>>> {
    cfg.validate()?;
    let mut found: Vec<&Label> = Vec::new();
    for e in essentials {
        if store.node(e).is_some() && !found.contains(&e) {
            found.push(e);
        }
    }

    let mut best: BTreeMap<&Label, &Relation> = BTreeMap::new();
    for root in &found {
        for (node, rel) in store.scored_neighbors(root, cfg.max_distance, cfg.window, cfg.alpha)? {
            if found.contains(&&node.label) {
                continue;
            }
            best.entry(&node.label)
                .and_modify(|cur| {
                    if better(rel, cur, cfg.alpha) == Ordering::Greater {
                        *cur = rel;
                    }
                })
                .or_insert(rel);
        }
    }
    let mut ranked: Vec<(&Label, &Relation)> = best.into_iter().collect();
    ranked.sort_by(|(la, ra), (lb, rb)| better(rb, ra, cfg.alpha).then_with(|| la.cmp(lb)));

    let mut p: Vec<PromptEntry<F>> = found
        .into_iter()
        .map(|l| PromptEntry { label: l.clone(), essential: true, score: None, relation: None })
        .collect();
    p.extend(ranked.into_iter().map(|(l, r)| PromptEntry {
        label: l.clone(),
        essential: false,
        score: Some(score_of(r, cfg.alpha)),
        relation: Some(r.into()),
    }));
    p.truncate(cfg.max_prompt_concepts);
    Ok(p)
}

/// Prefix, the contexts of `p` in order joined by single spaces, then the
/// question, separated by blank lines.
pub fn assemble_prompt<F>(store: &GraphStore, p: &[PromptEntry<F>], question: &str) -> String {
    let contexts: Vec<&str> = p
        .iter()
        .filter_map(|e| store.node(&e.label))
        .map(|n| n.context.as_str())
        .filter(|c| !c.is_empty())
        .collect();
    let mut out = String::from(CHRONOLOGY_PREFIX);
    if !contexts.is_empty() {
        out.push_str("\n\n");
        out.push_str(&contexts.join(" "));
    }
    out.push_str("\n\n");
    out.push_str(question.trim());
    out
}

/// Retrieval followed by generation. With `provider` absent the trace stops
/// after prompt assembly. A provider failure is recorded in the trace.
pub fn answer<F: Scalar>(
    store: &GraphStore,
    extractor: &Extractor,
    question: &str,
    provider: Option<&dyn ChatProvider>,
    cfg: &RetrievalConfig<F>,
) -> Result<RetrievalTrace<F>> {
    let essentials = essential_labels(extractor, question);
    let prompt_set = build_prompt_set(store, &essentials, cfg)?;
    let essentials_found = prompt_set.iter().filter(|e| e.essential).map(|e| e.label.clone()).collect();
    let assembled_context = assemble_prompt(store, &prompt_set, question);
    let mut trace = RetrievalTrace {
        question: question.to_string(),
        essentials_requested: essentials,
        essentials_found,
        prompt_set,
        assembled_context,
        answer: None,
        error: None,
    };
    if let Some(provider) = provider {
        match provider.complete(&ChatRequest::single("", trace.assembled_context.clone())) {
            Ok(a) => trace.answer = Some(a.trim().to_string()),
            Err(e) => trace.error = Some(e.to_string()),
        }
    }
    Ok(trace)
}
