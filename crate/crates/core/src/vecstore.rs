//! The vector-database baseline.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::split_sentences;
use crate::num::{normalize, Scalar};
use crate::provider::{ChatProvider, ChatRequest, EmbeddingProvider};

pub const MAX_CHUNK_CHARS: usize = 400;
pub const DEFAULT_DIMENSION: usize = 256;
pub const DEFAULT_K: usize = 5;

/// Greedy sentence packing: each chunk holds as many consecutive sentences
/// as fit in 400 characters, and the next chunk starts at the previous
/// chunk's last sentence. A sentence longer than the cap is its own chunk.
pub fn segment(text: &str) -> Vec<String> {
    let sentences: Vec<String> = split_sentences(text).into_iter().map(|s| s.text).collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start < sentences.len() {
        let mut end = start + 1;
        let mut len = sentences[start].chars().count();
        while end < sentences.len() {
            let next = len + 1 + sentences[end].chars().count();
            if next > MAX_CHUNK_CHARS {
                break;
            }
            len = next;
            end += 1;
        }
        out.push(sentences[start..end].join(" "));
        if end == sentences.len() {
            break;
        }
        start = if end - start > 1 { end - 1 } else { end };
    }
    out
}

/// FNV-1a, 64 bit.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Feature-hashed character 3-grams of the lowercased text. A non-empty
/// text shorter than three characters counts as one gram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashedEmbedder {
    pub dimension: usize,
}

impl Default for HashedEmbedder {
    fn default() -> Self {
        Self { dimension: DEFAULT_DIMENSION }
    }
}

impl HashedEmbedder {
    pub fn counts(&self, text: &str) -> Vec<u64> {
        let mut v = vec![0u64; self.dimension];
        let chars: Vec<char> = text.to_lowercase().chars().collect();
        let mut buf = [0u8; 12];
        let mut hit = |gram: &[char]| {
            let mut n = 0;
            for c in gram {
                n += c.encode_utf8(&mut buf[n..]).len();
            }
            v[(fnv1a(&buf[..n]) % self.dimension as u64) as usize] += 1;
        };
        if chars.len() < 3 {
            if !chars.is_empty() {
                hit(&chars);
            }
        } else {
            chars.windows(3).for_each(hit);
        }
        v
    }
}

#[derive(Clone)]
pub enum Embedder {
    Hashed(HashedEmbedder),
    Remote { provider: Arc<dyn EmbeddingProvider>, dimension: usize },
}

impl std::fmt::Debug for Embedder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Embedder::Hashed(h) => f.debug_tuple("Hashed").field(h).finish(),
            Embedder::Remote { dimension, .. } => f.debug_struct("Remote").field("dimension", dimension).finish(),
        }
    }
}

impl Default for Embedder {
    fn default() -> Self {
        Embedder::Hashed(HashedEmbedder::default())
    }
}

impl Embedder {
    pub fn dimension(&self) -> usize {
        match self {
            Embedder::Hashed(h) => h.dimension,
            Embedder::Remote { dimension, .. } => *dimension,
        }
    }

    /// Unit-norm embedding of `text`. Zero vectors are an error.
    pub fn embed<F: Scalar>(&self, text: &str) -> Result<Vec<F>> {
        let mut v: Vec<F> = match self {
            Embedder::Hashed(h) => h.counts(text).into_iter().map(F::from_count).collect(),
            Embedder::Remote { provider, dimension } => {
                let raw = provider.embed(text)?;
                if raw.len() != *dimension {
                    return Err(crate::provider::ProviderError::Dimension { expected: *dimension, found: raw.len() }.into());
                }
                raw.into_iter()
                    .map(|x| F::from_f64(x).ok_or_else(|| Error::Embedding(format!("{x} is not representable"))))
                    .collect::<Result<_>>()?
            }
        };
        if !normalize(&mut v) {
            return Err(Error::Embedding(format!("zero vector for {:?}", truncate(text, 40))));
        }
        Ok(v)
    }
}

fn truncate(s: &str, n: usize) -> &str {
    s.char_indices().nth(n).map_or(s, |(i, _)| &s[..i])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Chunk<F> {
    pub ordinal: usize,
    pub text: String,
    pub vector: Vec<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Hit<F> {
    pub ordinal: usize,
    pub text: String,
    pub score: F,
}

#[derive(Debug, Clone)]
pub struct VectorStore<F> {
    embedder: Embedder,
    chunks: Vec<Chunk<F>>,
}

impl<F: Scalar> Default for VectorStore<F> {
    fn default() -> Self {
        Self::new(Embedder::default())
    }
}

impl<F: Scalar> VectorStore<F> {
    pub fn new(embedder: Embedder) -> Self {
        Self { embedder, chunks: Vec::new() }
    }

    pub fn embedder(&self) -> &Embedder {
        &self.embedder
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn chunks(&self) -> &[Chunk<F>] {
        &self.chunks
    }

    /// Segments, embeds and stores `text`. Returns the new ordinals. Nothing
    /// is stored if any chunk fails to embed.
    pub fn add(&mut self, text: &str) -> Result<Vec<usize>> {
        let mut fresh = Vec::new();
        for (i, piece) in segment(text).into_iter().enumerate() {
            let vector = self.embedder.embed(&piece)?;
            fresh.push(Chunk { ordinal: self.chunks.len() + i, text: piece, vector });
        }
        let ords = fresh.iter().map(|c| c.ordinal).collect();
        self.chunks.extend(fresh);
        Ok(ords)
    }

    /// Exact top-`k` by cosine similarity, ties to the lower ordinal.
    pub fn query(&self, question: &str, k: usize) -> Result<Vec<Hit<F>>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if self.chunks.is_empty() {
            return Ok(Vec::new());
        }
        let q: Vec<F> = self.embedder.embed(question)?;
        let mut scored: Vec<(F, usize)> =
            self.chunks.iter().enumerate().map(|(i, c)| (dot(&q, &c.vector), i)).collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        // Equal cosines computed through different summation orders can
        // differ in the last bits; runs within rounding noise of their first
        // member count as ties and go by ordinal.
        let tol = F::epsilon() * F::from_count(1024);
        let mut start = 0;
        while start < scored.len() {
            let head = scored[start].0;
            let end = start + scored[start..].iter().take_while(|(s, _)| (head - *s).abs() <= tol).count();
            scored[start..end].sort_by_key(|(_, i)| *i);
            start = end;
        }
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(score, i)| Hit { ordinal: self.chunks[i].ordinal, text: self.chunks[i].text.clone(), score })
            .collect())
    }

    /// JSON array of `{ordinal, text, vector}`.
    pub fn snapshot(&self) -> Vec<u8> {
        serde_json::to_vec(&self.chunks).expect("chunks always serialize")
    }

    pub fn load(bytes: &[u8], embedder: Embedder) -> Result<Self> {
        let chunks: Vec<Chunk<F>> = serde_json::from_slice(bytes)?;
        let tol = F::from_f64(1e-6).expect("tolerance representable");
        for (i, c) in chunks.iter().enumerate() {
            if c.ordinal != i {
                return Err(Error::SnapshotInvalid(format!("chunk {i} has ordinal {}", c.ordinal)));
            }
            if c.vector.len() != embedder.dimension() {
                return Err(Error::SnapshotInvalid(format!(
                    "chunk {i} has dimension {}, embedder has {}",
                    c.vector.len(),
                    embedder.dimension()
                )));
            }
            let norm = c.vector.iter().map(|x| *x * *x).sum::<F>().sqrt();
            if (norm - F::one()).abs() > tol {
                return Err(Error::SnapshotInvalid(format!("chunk {i} is not unit length")));
            }
        }
        Ok(Self { embedder, chunks })
    }
}

fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct VectorTrace<F> {
    pub question: String,
    pub hits: Vec<Hit<F>>,
    /// The prompt sent (or that would be sent) to the provider.
    pub assembled_context: String,
    pub answer: Option<String>,
    pub error: Option<String>,
}

/// Retrieved chunks joined by single spaces, then the question. No
/// chronology prefix.
pub fn answer_vec<F: Scalar>(
    store: &VectorStore<F>,
    question: &str,
    provider: Option<&dyn ChatProvider>,
    k: usize,
) -> Result<VectorTrace<F>> {
    let hits = store.query(question, k)?;
    let contexts: Vec<&str> = hits.iter().map(|h| h.text.as_str()).collect();
    let assembled_context = if contexts.is_empty() {
        question.trim().to_string()
    } else {
        format!("{}\n\n{}", contexts.join(" "), question.trim())
    };
    let mut trace = VectorTrace { question: question.to_string(), hits, assembled_context, answer: None, error: None };
    if let Some(p) = provider {
        match p.complete(&ChatRequest::single("", trace.assembled_context.clone())) {
            Ok(a) => trace.answer = Some(a.trim().to_string()),
            Err(e) => trace.error = Some(e.to_string()),
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cosine;
    use crate::provider::ScriptedProvider;

    #[test]
    fn segment_examples() {
        assert_eq!(segment("Just one."), vec!["Just one."]);
        assert!(segment("").is_empty());
        let s: Vec<String> = (0..5).map(|i| format!("{}{}.", i, "x".repeat(148))).collect();
        assert!(s.iter().all(|x| x.len() == 150));
        let chunks = segment(&s.join(" "));
        assert_eq!(chunks.len(), 4);
        for (i, c) in chunks.iter().enumerate() {
            assert_eq!(c, &format!("{} {}", s[i], s[i + 1]));
        }
    }

    #[test]
    fn long_sentence_alone() {
        let long = format!("{}.", "y".repeat(500));
        assert_eq!(segment(&format!("{long} Short one.")), vec![long.clone(), "Short one.".to_string()]);
    }

    #[test]
    fn embed_unit_and_deterministic() {
        let e = Embedder::default();
        let a: Vec<f64> = e.embed("Brandon likes tea.").unwrap();
        let b: Vec<f64> = e.embed("Brandon likes tea.").unwrap();
        assert_eq!(a, b);
        assert!((cosine(&a, &a) - 1.0).abs() < 1e-12);
        assert!(e.embed::<f64>("").is_err());
        assert!(e.embed::<f32>("ab").is_ok());
    }

    #[test]
    fn query_rules() {
        let mut s = VectorStore::<f64>::default();
        assert!(s.query("anything", 3).unwrap().is_empty());
        s.add("Brandon works for Cisco.").unwrap();
        assert_eq!(s.query("zebra", 1).unwrap()[0].ordinal, 0);
        s.add("The sky is blue.").unwrap();
        s.add("Brandon works for Cisco.").unwrap();
        let hits = s.query("The sky is blue.", 10).unwrap();
        assert_eq!(hits.len(), 3);
        assert_eq!(hits[0].ordinal, 1);
        let hits = s.query("Brandon works for Cisco.", 2).unwrap();
        assert_eq!((hits[0].ordinal, hits[1].ordinal), (0, 2));
        assert!(s.query("x", 0).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let mut s = VectorStore::<f64>::default();
        s.add("One fact. Two facts.").unwrap();
        let back = VectorStore::<f64>::load(&s.snapshot(), Embedder::default()).unwrap();
        assert_eq!(back.chunks(), s.chunks());
        assert!(VectorStore::<f64>::load(&s.snapshot(), Embedder::Hashed(HashedEmbedder { dimension: 8 })).is_err());
    }

    #[test]
    fn answer_vec_modes() {
        let s = VectorStore::<f64>::default();
        let p = ScriptedProvider::echo();
        let t = answer_vec(&s, "Who?", Some(&p), DEFAULT_K).unwrap();
        assert_eq!(p.requests()[0].last_user(), Some("Who?"));
        assert_eq!(t.answer.as_deref(), Some("Who?"));
        let t = answer_vec(&s, "Who?", None, DEFAULT_K).unwrap();
        assert!(t.answer.is_none());
    }
}
