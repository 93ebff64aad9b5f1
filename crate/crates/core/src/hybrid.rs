//! Runs the graph and vector paths side by side and keeps one answer.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::Extractor;
use crate::kgraph::GraphStore;
use crate::num::Scalar;
use crate::provider::{ChatProvider, ChatRequest};
use crate::recall::{self, RetrievalConfig, RetrievalTrace};
use crate::vecstore::{self, VectorStore, VectorTrace};

pub const DISCRIMINATOR_TEMPLATE: &str = include_str!("../assets/discriminator_prompt.txt");

/// Case-insensitive substrings that mark an answer as uncertain.
pub const UNCERTAINTY_PHRASES: &[&str] = &[
    "not having enough information",
    "not have enough information",
    "not enough information",
    "conflicting information",
    "cannot",
    "don't know",
    "do not know",
    "no information",
    "unable to",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Choice {
    /// The graph answer.
    A,
    /// The vector answer.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Discriminator,
    Heuristic,
    /// Only one backend produced an answer.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrimination {
    pub choice: Choice,
    pub basis: Basis,
    /// Why the provider verdict was not used, if it was not.
    pub note: Option<String>,
}

pub fn uncertainty_score(answer: &str) -> usize {
    let lower = answer.to_lowercase();
    UNCERTAINTY_PHRASES.iter().map(|p| lower.matches(p).count()).sum()
}

/// Fewer uncertainty hits wins; ties go to A.
pub fn heuristic_choice(answer_a: &str, answer_b: &str) -> Choice {
    if uncertainty_score(answer_b) < uncertainty_score(answer_a) {
        Choice::B
    } else {
        Choice::A
    }
}

/// Reads a verdict: exactly one of the standalone letters `A`/`B` must occur.
pub fn parse_choice(output: &str) -> Option<Choice> {
    let mut seen = None;
    for tok in output.split(|c: char| !c.is_ascii_alphanumeric()) {
        let c = match tok {
            "A" | "a" => Choice::A,
            "B" | "b" => Choice::B,
            _ => continue,
        };
        match seen {
            None => seen = Some(c),
            Some(prev) if prev != c => return None,
            _ => {}
        }
    }
    seen
}

pub fn discriminator_prompt(question: &str, answer_a: &str, answer_b: &str) -> String {
    DISCRIMINATOR_TEMPLATE
        .replace("{question}", question.trim())
        .replace("{answer_a}", answer_a.trim())
        .replace("{answer_b}", answer_b.trim())
}

/// Picks the more certain of two answers. Uses the provider when given and
/// falls back to [`heuristic_choice`] when it errors or its output does not
/// parse.
pub fn discriminate(
    question: &str,
    answer_a: &str,
    answer_b: &str,
    provider: Option<&dyn ChatProvider>,
) -> Discrimination {
    let heuristic = |note: Option<String>| Discrimination {
        choice: heuristic_choice(answer_a, answer_b),
        basis: Basis::Heuristic,
        note,
    };
    let Some(p) = provider else {
        return heuristic(None);
    };
    let mut req = ChatRequest::single("", discriminator_prompt(question, answer_a, answer_b));
    req.max_tokens = 4;
    match p.complete(&req) {
        Ok(out) => match parse_choice(&out) {
            Some(choice) => Discrimination { choice, basis: Basis::Discriminator, note: None },
            None => heuristic(Some(format!("unparseable verdict {:?}", out.trim()))),
        },
        Err(e) => heuristic(Some(format!("discriminator failed: {e}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct HybridTrace<F> {
    pub question: String,
    pub graph: Option<RetrievalTrace<F>>,
    pub vector: Option<VectorTrace<F>>,
    pub chosen: Option<Choice>,
    pub basis: Option<Basis>,
    pub answer: Option<String>,
    pub note: Option<String>,
    pub error: Option<String>,
}

/// Answers through both backends concurrently and selects one answer.
///
/// `vector = None` disables the vector path. With `provider = None` both
/// retrievals run and nothing is chosen.
pub fn hybrid_answer<F: Scalar>(
    graph: &GraphStore,
    extractor: &Extractor,
    vector: Option<&VectorStore<F>>,
    question: &str,
    provider: Option<&dyn ChatProvider>,
    cfg: &RetrievalConfig<F>,
    k: usize,
) -> Result<HybridTrace<F>> {
    let (g, v) = std::thread::scope(|s| {
        let v = vector.map(|vs| s.spawn(move || vecstore::answer_vec(vs, question, provider, k)));
        let g = recall::answer(graph, extractor, question, provider, cfg);
        (g, v.map(|h| h.join().expect("vector worker panicked")))
    });
    let mut errors = Vec::new();
    let graph_trace = g.map_err(|e| errors.push(format!("graph: {e}"))).ok();
    let vector_trace = match v {
        Some(r) => r.map_err(|e| errors.push(format!("vector: {e}"))).ok(),
        None => None,
    };
    let mut trace = HybridTrace {
        question: question.to_string(),
        graph: graph_trace,
        vector: vector_trace,
        chosen: None,
        basis: None,
        answer: None,
        note: None,
        error: None,
    };
    if provider.is_none() {
        trace.error = (!errors.is_empty()).then(|| errors.join("; "));
        return Ok(trace);
    }
    let ga = trace.graph.as_ref().and_then(|t| t.answer.clone());
    let va = trace.vector.as_ref().and_then(|t| t.answer.clone());
    for (name, t) in [("graph", trace.graph.as_ref().and_then(|t| t.error.clone())), ("vector", trace.vector.as_ref().and_then(|t| t.error.clone()))] {
        if let Some(e) = t {
            errors.push(format!("{name}: {e}"));
        }
    }
    match (ga, va) {
        (Some(a), Some(b)) => {
            let d = discriminate(question, &a, &b, provider);
            trace.answer = Some(if d.choice == Choice::A { a } else { b });
            trace.chosen = Some(d.choice);
            trace.basis = Some(d.basis);
            trace.note = d.note;
        }
        (Some(a), None) => {
            trace.answer = Some(a);
            trace.chosen = Some(Choice::A);
            trace.basis = Some(Basis::Fallback);
        }
        (None, Some(b)) => {
            trace.answer = Some(b);
            trace.chosen = Some(Choice::B);
            trace.basis = Some(Basis::Fallback);
        }
        (None, None) => {
            if errors.is_empty() {
                errors.push("no backend produced an answer".into());
            }
        }
    }
    trace.error = (!errors.is_empty()).then(|| errors.join("; "));
    Ok(trace)
}

/// Per-question scores keyed by question id.
pub type GradeTable = BTreeMap<String, u32>;

/// Total score over the maximum possible, as a fraction.
pub fn accuracy<F: Scalar>(grades: &GradeTable, max_score: u32) -> Result<F> {
    if grades.is_empty() || max_score == 0 {
        return Err(Error::Grading("accuracy needs at least one grade and a positive scale".into()));
    }
    if let Some((q, s)) = grades.iter().find(|(_, s)| **s > max_score) {
        return Err(Error::Grading(format!("grade {s} for {q} exceeds the scale maximum {max_score}")));
    }
    let total: u64 = grades.values().map(|s| u64::from(*s)).sum();
    Ok(F::from_count(total) / F::from_count(grades.len() as u64 * u64::from(max_score)))
}

/// Accuracy of an oracle that always picks the better of the two answers.
pub fn perfect_discriminator_accuracy<F: Scalar>(
    grades_graph: &GradeTable,
    grades_vec: &GradeTable,
    max_score: u32,
) -> Result<F> {
    if !grades_graph.keys().eq(grades_vec.keys()) {
        return Err(Error::Grading("the two grade tables cover different questions".into()));
    }
    let best: GradeTable = grades_graph
        .iter()
        .map(|(q, g)| (q.clone(), (*g).max(grades_vec[q])))
        .collect();
    accuracy(&best, max_score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::{Reply, ScriptedProvider};

    fn table(scores: &[u32]) -> GradeTable {
        scores.iter().enumerate().map(|(i, s)| (format!("q{i}"), *s)).collect()
    }

    #[test]
    fn heuristic_examples() {
        let d = discriminate("Where?", "Cisco.", "I do not have enough information to answer the question.", None);
        assert_eq!((d.choice, d.basis), (Choice::A, Basis::Heuristic));
        assert_eq!(heuristic_choice("Cisco.", "Google."), Choice::A);
        assert_eq!(heuristic_choice("There is conflicting information.", "Google."), Choice::B);
        assert_eq!(uncertainty_score("I CANNOT say; I Don't Know."), 2);
    }

    #[test]
    fn verdict_parsing() {
        assert_eq!(parse_choice("B"), Some(Choice::B));
        assert_eq!(parse_choice(" Better: a."), Some(Choice::A));
        assert_eq!(parse_choice("A or B"), None);
        assert_eq!(parse_choice("Both are fine"), None);
    }

    #[test]
    fn provider_verdicts() {
        let p = ScriptedProvider::new(Reply::text("B"));
        let d = discriminate("q", "x", "y", Some(&p));
        assert_eq!((d.choice, d.basis), (Choice::B, Basis::Discriminator));
        assert!(p.requests()[0].transcript().contains("Answer B: y"));
        let p = ScriptedProvider::new(Reply::text("hmm"));
        let d = discriminate("q", "I cannot tell.", "y", Some(&p));
        assert_eq!((d.choice, d.basis), (Choice::B, Basis::Heuristic));
        assert!(d.note.is_some());
    }

    #[test]
    fn hybrid_routes() {
        let g = GraphStore::new();
        let ex = Extractor::bundled();
        let cfg = RetrievalConfig::<f64>::default();
        let mut v = VectorStore::<f64>::default();
        v.add("Brandon works for Cisco.").unwrap();

        let p = ScriptedProvider::new(Reply::text("B")).with("Answer A:", Reply::text("B"));
        let t = hybrid_answer(&g, ex, Some(&v), "Where does Brandon work?", Some(&p), &cfg, 5).unwrap();
        assert_eq!((t.chosen, t.basis), (Some(Choice::B), Some(Basis::Discriminator)));

        let t = hybrid_answer(&g, ex, None, "Where does Brandon work?", Some(&p), &cfg, 5).unwrap();
        assert_eq!((t.chosen, t.basis), (Some(Choice::A), Some(Basis::Fallback)));

        let fail = ScriptedProvider::new(Reply::Fail("down".into()));
        let t = hybrid_answer(&g, ex, Some(&v), "Where?", Some(&fail), &cfg, 5).unwrap();
        assert!(t.answer.is_none() && t.chosen.is_none() && t.error.is_some());

        let t = hybrid_answer(&g, ex, Some(&v), "Where?", None, &cfg, 5).unwrap();
        assert!(t.graph.is_some() && t.vector.is_some() && t.chosen.is_none());
    }

    #[test]
    fn perfect_discriminator_examples() {
        let same = table(&[2, 1, 0]);
        let a: f64 = perfect_discriminator_accuracy(&same, &same, 2).unwrap();
        assert_eq!(a, accuracy::<f64>(&same, 2).unwrap());
        let a: f64 = perfect_discriminator_accuracy(&table(&[2, 0]), &table(&[0, 2]), 2).unwrap();
        assert_eq!(a, 1.0);
        let a: f64 = perfect_discriminator_accuracy(&table(&[1]), &table(&[0]), 2).unwrap();
        assert_eq!(a, 0.5);
        assert!(perfect_discriminator_accuracy::<f64>(&table(&[1]), &table(&[1, 1]), 2).is_err());
    }
}
