//! Property checks shared by the `properties` and `acceptance` targets.
//! Each runs a fixed-seed proptest runner and returns the first failure.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use recallm::extract::Extractor;
use recallm::hybrid::{accuracy, perfect_discriminator_accuracy, GradeTable};
use recallm::recall::build_prompt_set;
use recallm::update::{knowledge_update, FallbackReviser, RevisionPolicy};
use recallm::vecstore::VectorStore;
use recallm::{GraphStore, Label, RetrievalConfig, TemporalWindow};

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn finish(r: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

/// Raw material for a random store: node count, counter, per-node indices,
/// and `(x, y, strength, T)` edges.
#[derive(Debug, Clone)]
pub struct StoreSpec {
    pub n: usize,
    pub counter: u64,
    pub node_t: Vec<u64>,
    pub edges: Vec<(usize, usize, u64, u64)>,
}

pub fn label(i: usize) -> String {
    format!("n{i}")
}

pub fn arb_spec() -> impl Strategy<Value = StoreSpec> {
    (2usize..12, 1u64..20).prop_flat_map(|(n, counter)| {
        (
            Just(n),
            Just(counter),
            prop::collection::vec(1..=counter, n),
            prop::collection::vec((0..n, 0..n, 1u64..6, 1..=counter), 0..n * 3),
        )
            .prop_map(|(n, counter, node_t, edges)| StoreSpec { n, counter, node_t, edges })
    })
}

impl StoreSpec {
    /// Snapshot document for this spec. Duplicate pairs keep their first
    /// occurrence, self-pairs are dropped, and node indices are raised to
    /// their newest incident edge, as real updates would leave them.
    pub fn document(&self, strength_scale: u64) -> serde_json::Value {
        let mut seen = BTreeSet::new();
        let mut node_t = self.node_t.clone();
        let mut edges = Vec::new();
        for &(x, y, s, t) in &self.edges {
            if x == y {
                continue;
            }
            let (a, b) = if label(x) < label(y) { (x, y) } else { (y, x) };
            if !seen.insert((a, b)) {
                continue;
            }
            node_t[a] = node_t[a].max(t);
            node_t[b] = node_t[b].max(t);
            edges.push(serde_json::json!({"a": label(a), "b": label(b), "strength": s * strength_scale, "t": t}));
        }
        let nodes: serde_json::Map<String, serde_json::Value> = (0..self.n)
            .map(|i| {
                (label(i), serde_json::json!({"context": format!("Fact about {}.", label(i)), "merge_count": 1, "revisions_done": 0, "t": node_t[i]}))
            })
            .collect();
        serde_json::json!({"counter": self.counter, "edges": edges, "nodes": nodes, "version": 1})
    }

    pub fn store(&self) -> GraphStore {
        self.store_scaled(1)
    }

    pub fn store_scaled(&self, scale: u64) -> GraphStore {
        let bytes = serde_json::to_vec(&self.document(scale)).unwrap();
        GraphStore::load(&bytes).expect("generated snapshot loads")
    }
}

fn arb_window() -> impl Strategy<Value = Option<u64>> {
    prop_oneof![3 => (0u64..8).prop_map(Some), 1 => Just(None)]
}

fn window(w: Option<u64>) -> TemporalWindow {
    w.map_or(TemporalWindow::Unlimited, TemporalWindow::Limited)
}

fn le(a: Option<u64>, b: Option<u64>) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    }
}

/// Enlarging the window or the distance never drops a neighbour.
pub fn window_distance_monotonicity(cases: u32) -> Result<(), String> {
    let strat = (arb_spec(), arb_window(), arb_window(), 1usize..4, 1usize..4, 0usize..12);
    finish(runner(cases).run(&strat, |(spec, w1, w2, d1, d2, root)| {
        let (w1, w2) = if le(w1, w2) { (w1, w2) } else { (w2, w1) };
        let (d1, d2) = (d1.min(d2), d1.max(d2));
        let g = spec.store();
        let root = Label::new(label(root % spec.n)).unwrap();
        let small: BTreeSet<String> =
            g.neighbors(&root, d1, window(w1)).unwrap().iter().map(|n| n.node.label.to_string()).collect();
        let large: BTreeSet<String> =
            g.neighbors(&root, d2, window(w2)).unwrap().iter().map(|n| n.node.label.to_string()).collect();
        prop_assert!(small.is_subset(&large), "{small:?} not within {large:?}");
        Ok(())
    }))
}

/// `load(snapshot(g)) == g`, and the bytes are stable.
pub fn snapshot_round_trip(cases: u32) -> Result<(), String> {
    finish(runner(cases).run(&arb_spec(), |spec| {
        let g = spec.store();
        let bytes = g.snapshot();
        let back = GraphStore::load(&bytes).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.snapshot(), bytes);
        Ok(())
    }))
}

const NAMES: [&str; 5] = ["Bob", "Tom", "Kim", "Zed", "Ann"];

/// Strengths, indices and merge counts after random updates equal tallies
/// computed directly from the generated name sequences.
pub fn strength_accounting(cases: u32) -> Result<(), String> {
    let strat = prop::collection::vec(prop::collection::vec(0usize..5, 1..6), 1..12);
    finish(runner(cases).run(&strat, |updates| {
        let mut g = GraphStore::new();
        let mut pair_count: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
        let mut node_count: BTreeMap<String, (u64, u64)> = BTreeMap::new();
        for (i, names) in updates.iter().enumerate() {
            let t = i as u64 + 1;
            let text = format!("{}.", names.iter().map(|n| NAMES[*n]).collect::<Vec<_>>().join(" and "));
            knowledge_update(&mut g, Extractor::bundled(), &text, &RevisionPolicy::disabled(), &FallbackReviser::default())
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let lower: Vec<String> = names.iter().map(|n| NAMES[*n].to_lowercase()).collect();
            let pairs: BTreeSet<(String, String)> = lower
                .windows(2)
                .filter(|w| w[0] != w[1])
                .map(|w| if w[0] < w[1] { (w[0].clone(), w[1].clone()) } else { (w[1].clone(), w[0].clone()) })
                .collect();
            for p in pairs {
                let e = pair_count.entry(p).or_default();
                e.0 += 1;
                e.1 = t;
            }
            for n in lower.into_iter().collect::<BTreeSet<_>>() {
                let e = node_count.entry(n).or_default();
                e.0 += 1;
                e.1 = t;
            }
        }
        prop_assert_eq!(g.global_counter(), updates.len() as u64);
        prop_assert_eq!(g.edge_count(), pair_count.len());
        for ((a, b), (strength, t)) in &pair_count {
            let rel = g.edge(&Label::new(a.as_str()).unwrap(), &Label::new(b.as_str()).unwrap());
            let rel = rel.ok_or_else(|| TestCaseError::fail(format!("missing edge {a}-{b}")))?;
            prop_assert_eq!((rel.strength, rel.temporal_index), (*strength, *t));
        }
        prop_assert_eq!(g.node_count(), node_count.len());
        for (n, (merges, t)) in &node_count {
            let node = g.node_by_str(n).unwrap();
            prop_assert_eq!((node.merge_count, node.temporal_index), (*merges, *t));
        }
        Ok(())
    }))
}

/// `|P| ≤ max`, found essentials lead in question order, no repeats.
pub fn prompt_set_capacity(cases: u32) -> Result<(), String> {
    let strat = (arb_spec(), prop::collection::vec(0usize..14, 0..5), 1usize..=12, 0u32..6, arb_window(), 1usize..4);
    finish(runner(cases).run(&strat, |(spec, ess, max, alpha, w, d)| {
        let g = spec.store();
        let essentials: Vec<Label> = ess.iter().map(|i| Label::new(label(*i)).unwrap()).collect();
        for cap in [max, 10] {
            let cfg = RetrievalConfig {
                max_prompt_concepts: cap,
                max_distance: d,
                alpha: f64::from(alpha),
                window: window(w),
            };
            let p = build_prompt_set(&g, &essentials, &cfg).unwrap();
            prop_assert!(p.len() <= cap);
            let mut found: Vec<&Label> = Vec::new();
            for e in &essentials {
                if g.node(e).is_some() && !found.contains(&e) {
                    found.push(e);
                }
            }
            found.truncate(cap);
            let lead: Vec<&Label> = p.iter().take_while(|e| e.essential).map(|e| &e.label).collect();
            prop_assert_eq!(lead, found);
            let uniq: BTreeSet<&Label> = p.iter().map(|e| &e.label).collect();
            prop_assert_eq!(uniq.len(), p.len());
        }
        Ok(())
    }))
}

/// Scaling α and every strength by the same factor keeps the ranking.
pub fn argmax_stability(cases: u32) -> Result<(), String> {
    let strat = (arb_spec(), 0usize..12, 1u64..6, 0u32..5);
    finish(runner(cases).run(&strat, |(spec, root, c, alpha)| {
        let root = vec![Label::new(label(root % spec.n)).unwrap()];
        let cfg = |a: f64| RetrievalConfig { max_prompt_concepts: 64, alpha: a, window: TemporalWindow::Unlimited, ..Default::default() };
        let base = build_prompt_set(&spec.store(), &root, &cfg(f64::from(alpha))).unwrap();
        let scaled = build_prompt_set(&spec.store_scaled(c), &root, &cfg(f64::from(alpha) * c as f64)).unwrap();
        let names = |p: &[recallm::recall::PromptEntry<f64>]| p.iter().map(|e| e.label.to_string()).collect::<Vec<_>>();
        prop_assert_eq!(names(&base), names(&scaled));
        Ok(())
    }))
}

/// Independent re-implementation of the hashed 3-gram embedding, kept as
/// raw integer counts.
pub fn oracle_counts(text: &str, dim: usize) -> Vec<u64> {
    let lower: Vec<char> = text.to_lowercase().chars().collect();
    let grams: Vec<String> = if lower.len() < 3 {
        if lower.is_empty() { vec![] } else { vec![lower.iter().collect()] }
    } else {
        (0..lower.len() - 2).map(|i| lower[i..i + 3].iter().collect()).collect()
    };
    let mut v = vec![0u64; dim];
    for g in grams {
        let mut h: u64 = 14695981039346656037;
        for b in g.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(1099511628211);
        }
        v[(h % dim as u64) as usize] += 1;
    }
    v
}

/// Exact scan: cosines from integer counts, ties to the lower ordinal.
pub fn oracle_top_k(chunks: &[String], question: &str, k: usize, dim: usize) -> Vec<(usize, f64)> {
    let q = oracle_counts(question, dim);
    let qn: u64 = q.iter().map(|x| x * x).sum();
    let mut scored: Vec<(usize, u64, u64)> = chunks
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let v = oracle_counts(c, dim);
            let dot: u64 = v.iter().zip(&q).map(|(a, b)| a * b).sum();
            (i, dot, v.iter().map(|x| x * x).sum())
        })
        .collect();
    // dot_i / sqrt(n_i) ordering, compared exactly as dot_i² · n_j.
    scored.sort_by(|a, b| {
        let lhs = (b.1 as u128).pow(2) * a.2 as u128;
        let rhs = (a.1 as u128).pow(2) * b.2 as u128;
        lhs.cmp(&rhs).then(a.0.cmp(&b.0))
    });
    scored
        .into_iter()
        .take(k)
        .map(|(i, dot, n)| (i, dot as f64 / ((n as f64).sqrt() * (qn as f64).sqrt())))
        .collect()
}

/// `query` agrees with the exact scan on order and scores.
pub fn vecstore_oracle(cases: u32) -> Result<(), String> {
    let text = "[a-e ]{1,24}";
    let strat = (prop::collection::vec(text, 1..15), text, 1usize..8);
    finish(runner(cases).run(&strat, |(texts, question, k)| {
        let mut store: VectorStore<f64> = VectorStore::default();
        for t in &texts {
            if t.trim().is_empty() {
                continue;
            }
            store.add(t).map_err(|e| TestCaseError::fail(e.to_string()))?;
        }
        if question.trim().is_empty() || store.is_empty() {
            return Ok(());
        }
        let chunks: Vec<String> = store.chunks().iter().map(|c| c.text.clone()).collect();
        let got = store.query(&question, k).unwrap();
        let want = oracle_top_k(&chunks, &question, k, 256);
        prop_assert_eq!(got.len(), want.len());
        for (g, (ord, score)) in got.iter().zip(&want) {
            prop_assert_eq!(g.ordinal, *ord);
            prop_assert!((g.score - score).abs() < 1e-9, "score {} vs {}", g.score, score);
        }
        Ok(())
    }))
}

/// The per-question maximum never scores below either backend.
pub fn perfect_discriminator_dominance(cases: u32) -> Result<(), String> {
    let strat = (1usize..30).prop_flat_map(|n| {
        (prop::collection::vec(0u32..=2, n), prop::collection::vec(0u32..=2, n))
    });
    finish(runner(cases).run(&strat, |(g, v)| {
        let t = |s: &[u32]| -> GradeTable { s.iter().enumerate().map(|(i, x)| (format!("q{i}"), *x)).collect() };
        let (tg, tv) = (t(&g), t(&v));
        let pd: f64 = perfect_discriminator_accuracy(&tg, &tv, 2).unwrap();
        let best = accuracy::<f64>(&tg, 2).unwrap().max(accuracy::<f64>(&tv, 2).unwrap());
        prop_assert!(pd >= best);
        Ok(())
    }))
}

/// Every word of the published vocabulary stems to the published output.
/// Returns the number of words checked.
pub fn porter_vocabulary() -> Result<usize, String> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");
    let voc = std::fs::read_to_string(format!("{dir}/porter_voc.txt")).map_err(|e| e.to_string())?;
    let out = std::fs::read_to_string(format!("{dir}/porter_output.txt")).map_err(|e| e.to_string())?;
    let (voc, out): (Vec<&str>, Vec<&str>) = (voc.lines().collect(), out.lines().collect());
    if voc.len() != out.len() {
        return Err(format!("vocabulary has {} words, output {}", voc.len(), out.len()));
    }
    let bad: Vec<String> = voc
        .iter()
        .zip(&out)
        .filter_map(|(w, want)| {
            let got = recallm::extract::stem(w);
            (got != *want).then(|| format!("{w}: {got} != {want}"))
        })
        .collect();
    if bad.is_empty() {
        Ok(voc.len())
    } else {
        Err(format!("{} mismatches, first: {}", bad.len(), bad[0]))
    }
}
