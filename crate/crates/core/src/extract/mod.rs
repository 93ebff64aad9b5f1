//! Concept extraction: sentences, nouns, stems, contexts and adjacency.
//!
//! The pipeline is `split_sentences` → per-sentence `tag` → `stem` → one
//! ordered label sequence over the whole text → relations between adjacent
//! labels (self-pairs dropped) → concepts grouped by label with their
//! containing sentences concatenated in source order.

mod porter;
mod sentences;
mod tagger;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

pub use porter::stem;
pub use sentences::{split_sentences, Sentence};
pub use tagger::{tokenize, Lexicon, LexiconTagger, NounTagger, TokenOccurrence};

use crate::error::Error;
use crate::label::{EdgeKey, Label};

/// One concept as seen in a single text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptEntry {
    /// Containing sentences, in source order, single-space separated.
    pub context: String,
    /// Indices of the sentences backing `context`.
    pub sentences: Vec<usize>,
    /// Positions of this label within the batch `sequence`.
    pub occurrences: Vec<usize>,
}

/// Everything a knowledge update needs from one text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConceptBatch {
    pub concepts: BTreeMap<Label, ConceptEntry>,
    pub relations: BTreeSet<EdgeKey>,
    pub sequence: Vec<Label>,
}

impl ConceptBatch {
    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.relations.is_empty()
    }

    /// Checks that every relation endpoint is one of the batch concepts.
    pub fn validate(&self) -> Result<(), Error> {
        for key in &self.relations {
            for end in [key.a(), key.b()] {
                if !self.concepts.contains_key(end) {
                    return Err(Error::DanglingRelation {
                        a: key.a().to_string(),
                        b: key.b().to_string(),
                        missing: end.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Builds a batch from labelled occurrences. Used by the extractor and
    /// handy for constructing synthetic batches in tests.
    pub fn from_occurrences<'a>(
        occurrences: impl IntoIterator<Item = (Label, usize, &'a str)>,
    ) -> Self {
        let mut batch = ConceptBatch::default();
        for (label, sentence, text) in occurrences {
            let pos = batch.sequence.len();
            let entry = batch.concepts.entry(label.clone()).or_insert_with(|| ConceptEntry {
                context: String::new(),
                sentences: Vec::new(),
                occurrences: Vec::new(),
            });
            if entry.sentences.last() != Some(&sentence) {
                if !entry.context.is_empty() {
                    entry.context.push(' ');
                }
                entry.context.push_str(text);
                entry.sentences.push(sentence);
            }
            entry.occurrences.push(pos);
            batch.sequence.push(label);
        }
        batch.relations = batch
            .sequence
            .windows(2)
            .filter_map(|w| EdgeKey::new(w[0].clone(), w[1].clone()))
            .collect();
        batch
    }
}

/// Extraction front end parameterized by the noun tagger.
#[derive(Clone)]
pub struct Extractor {
    tagger: Arc<dyn NounTagger>,
}

impl Default for Extractor {
    fn default() -> Self {
        Self { tagger: Arc::new(LexiconTagger::default()) }
    }
}

impl std::fmt::Debug for Extractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Extractor").finish_non_exhaustive()
    }
}

impl Extractor {
    pub fn new(tagger: Arc<dyn NounTagger>) -> Self {
        Self { tagger }
    }

    /// Shared instance using the bundled lexicons.
    pub fn bundled() -> &'static Extractor {
        static BUNDLED: OnceLock<Extractor> = OnceLock::new();
        BUNDLED.get_or_init(Extractor::default)
    }

    pub fn tag_nouns(&self, sentence: &Sentence) -> Vec<TokenOccurrence> {
        self.tagger.tag(sentence)
    }

    pub fn extract_concepts(&self, text: &str) -> ConceptBatch {
        let sentences = split_sentences(text);
        let mut occ = Vec::new();
        for s in &sentences {
            for tok in self.tagger.tag(s) {
                if let Some(label) = label_for(&tok.token) {
                    occ.push((label, s.index, s.text.as_str()));
                }
            }
        }
        ConceptBatch::from_occurrences(occ)
    }

    /// Stemmed noun labels of a question, first-occurrence order, no
    /// duplicates.
    pub fn essential_labels(&self, question: &str) -> Vec<Label> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for s in split_sentences(question) {
            for tok in self.tagger.tag(&s) {
                if let Some(label) = label_for(&tok.token) {
                    if seen.insert(label.clone()) {
                        out.push(label);
                    }
                }
            }
        }
        out
    }
}

fn label_for(token: &str) -> Option<Label> {
    Label::new(stem(token)).ok()
}

/// [`Extractor::extract_concepts`] with the bundled lexicons.
pub fn extract_concepts(text: &str) -> ConceptBatch {
    Extractor::bundled().extract_concepts(text)
}

/// [`Extractor::tag_nouns`] with the bundled lexicons.
pub fn tag_nouns(sentence: &Sentence) -> Vec<TokenOccurrence> {
    Extractor::bundled().tag_nouns(sentence)
}
