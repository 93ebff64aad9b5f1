//! Embedded temporal concept graph.
//!
//! Nodes are concepts keyed by label, edges are undirected relations keyed by
//! a canonical label pair. Every node and edge carries the value of the
//! global counter at the update that last touched it; edges also carry a
//! Hebbian strength that grows by one each time the adjacency is re-observed.
//!
//! The store has no interior mutability: share it behind an `RwLock` for the
//! single-writer, many-reader discipline.

mod snapshot;
mod traversal;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::ConceptBatch;
use crate::label::{EdgeKey, Label};

pub use snapshot::SNAPSHOT_VERSION;
#[cfg(test)]
pub(crate) use snapshot::tests::store_from;
pub use traversal::{relation_score, Neighbor, TemporalWindow};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptNode {
    pub label: Label,
    /// Chronological context, sentences separated by single spaces.
    pub context: String,
    pub temporal_index: u64,
    /// Number of knowledge updates that touched this concept, creation included.
    pub merge_count: u64,
    pub revisions_done: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub a: Label,
    pub b: Label,
    pub strength: u64,
    pub temporal_index: u64,
}

impl Relation {
    pub fn key(&self) -> EdgeKey {
        EdgeKey::new(self.a.clone(), self.b.clone()).expect("relations never self-loop")
    }

    pub fn other(&self, end: &Label) -> &Label {
        if *end == self.a {
            &self.b
        } else {
            &self.a
        }
    }
}

/// Tallies of one `merge_batch` call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeReport {
    pub nodes_created: usize,
    pub nodes_merged: usize,
    pub edges_created: usize,
    pub edges_strengthened: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphStore {
    nodes: BTreeMap<Label, ConceptNode>,
    edges: BTreeMap<EdgeKey, Relation>,
    adjacency: BTreeMap<Label, BTreeSet<Label>>,
    counter: u64,
}

impl GraphStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// The global temporal counter `t`.
    pub fn global_counter(&self) -> u64 {
        self.counter
    }

    /// Starts a knowledge update: `t ← t + 1`.
    pub fn advance_counter(&mut self) -> u64 {
        self.counter += 1;
        self.counter
    }

    pub fn node(&self, label: &Label) -> Option<&ConceptNode> {
        self.nodes.get(label)
    }

    pub fn node_by_str(&self, label: &str) -> Option<&ConceptNode> {
        Label::new(label).ok().and_then(|l| self.nodes.get(&l))
    }

    pub fn edge(&self, x: &Label, y: &Label) -> Option<&Relation> {
        EdgeKey::new(x.clone(), y.clone()).and_then(|k| self.edges.get(&k))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ConceptNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Relation> {
        self.edges.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Labels directly adjacent to `label`.
    pub fn adjacent(&self, label: &Label) -> impl Iterator<Item = &Label> {
        self.adjacency.get(label).into_iter().flatten()
    }

    pub(crate) fn node_mut(&mut self, label: &Label) -> Option<&mut ConceptNode> {
        self.nodes.get_mut(label)
    }

    /// Merges one extracted batch at the current counter value.
    ///
    /// Existing concepts get the new context appended and their merge count
    /// bumped; relations are created with strength 1 or strengthened by 1.
    /// Everything the batch mentions gets `T ← t`. The batch is validated
    /// before anything is written.
    pub fn merge_batch(&mut self, batch: &ConceptBatch) -> Result<MergeReport> {
        batch.validate()?;
        let t = self.counter;
        let mut report = MergeReport::default();
        for (label, entry) in &batch.concepts {
            match self.nodes.get_mut(label) {
                Some(node) => {
                    if node.context.is_empty() {
                        node.context = entry.context.clone();
                    } else if !entry.context.is_empty() {
                        node.context.push(' ');
                        node.context.push_str(&entry.context);
                    }
                    node.merge_count += 1;
                    node.temporal_index = t;
                    report.nodes_merged += 1;
                }
                None => {
                    self.nodes.insert(
                        label.clone(),
                        ConceptNode {
                            label: label.clone(),
                            context: entry.context.clone(),
                            temporal_index: t,
                            merge_count: 1,
                            revisions_done: 0,
                        },
                    );
                    report.nodes_created += 1;
                }
            }
        }
        for key in &batch.relations {
            match self.edges.get_mut(key) {
                Some(rel) => {
                    rel.strength += 1;
                    rel.temporal_index = t;
                    report.edges_strengthened += 1;
                }
                None => {
                    self.insert_edge(Relation {
                        a: key.a().clone(),
                        b: key.b().clone(),
                        strength: 1,
                        temporal_index: t,
                    });
                    report.edges_created += 1;
                }
            }
        }
        Ok(report)
    }

    fn insert_edge(&mut self, rel: Relation) {
        self.adjacency.entry(rel.a.clone()).or_default().insert(rel.b.clone());
        self.adjacency.entry(rel.b.clone()).or_default().insert(rel.a.clone());
        self.edges.insert(rel.key(), rel);
    }

    /// Verifies the structural invariants. Used after loading a snapshot and
    /// by tests.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (label, node) in &self.nodes {
            if &node.label != label {
                return Err(format!("node keyed {label} carries label {}", node.label));
            }
            if node.merge_count < 1 {
                return Err(format!("node {label} has merge_count 0"));
            }
            if node.temporal_index > self.counter {
                return Err(format!("node {label} has T={} > t={}", node.temporal_index, self.counter));
            }
        }
        for (key, rel) in &self.edges {
            if rel.a >= rel.b {
                return Err(format!("edge ({}, {}) is not in canonical order", rel.a, rel.b));
            }
            if &rel.key() != key {
                return Err(format!("edge ({}, {}) stored under the wrong key", rel.a, rel.b));
            }
            for end in [&rel.a, &rel.b] {
                if !self.nodes.contains_key(end) {
                    return Err(format!("edge ({}, {}) references missing node {end}", rel.a, rel.b));
                }
            }
            if rel.strength < 1 {
                return Err(format!("edge ({}, {}) has strength 0", rel.a, rel.b));
            }
            if rel.temporal_index > self.counter {
                return Err(format!("edge ({}, {}) has T={} > t={}", rel.a, rel.b, rel.temporal_index, self.counter));
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(counter: u64, nodes: Vec<ConceptNode>, edges: Vec<Relation>) -> Result<Self> {
        let mut store = GraphStore { counter, ..Default::default() };
        for n in nodes {
            store.nodes.insert(n.label.clone(), n);
        }
        for e in edges {
            if e.a == e.b {
                return Err(Error::SnapshotInvalid(format!("self-loop on {}", e.a)));
            }
            let key = e.key();
            if store.edges.contains_key(&key) {
                return Err(Error::SnapshotInvalid(format!("duplicate edge ({}, {})", e.a, e.b)));
            }
            store.insert_edge(e);
            debug_assert!(store.edges.contains_key(&key));
        }
        store.check_invariants().map_err(Error::SnapshotInvalid)?;
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn pair_batch() -> ConceptBatch {
        ConceptBatch::from_occurrences([(l("a"), 0, "A and B."), (l("b"), 0, "A and B.")])
    }

    #[test]
    fn empty_batch_is_identity() {
        let mut g = GraphStore::new();
        g.advance_counter();
        let before = g.clone();
        let r = g.merge_batch(&ConceptBatch::default()).unwrap();
        assert_eq!(r, MergeReport::default());
        assert_eq!(g, before);
    }

    #[test]
    fn merging_twice_strengthens() {
        let mut g = GraphStore::new();
        g.advance_counter();
        let r1 = g.merge_batch(&pair_batch()).unwrap();
        assert_eq!((r1.nodes_created, r1.edges_created), (2, 1));
        g.advance_counter();
        let r2 = g.merge_batch(&pair_batch()).unwrap();
        assert_eq!((r2.nodes_merged, r2.edges_strengthened), (2, 1));
        let e = g.edge(&l("a"), &l("b")).unwrap();
        assert_eq!(e.strength, 2);
        assert_eq!(e.temporal_index, 2);
        let a = g.node(&l("a")).unwrap();
        assert_eq!((a.temporal_index, a.merge_count), (2, 2));
        assert_eq!(g.node(&l("b")).unwrap().temporal_index, 2);
        assert_eq!(a.context, "A and B. A and B.");
        g.check_invariants().unwrap();
    }

    #[test]
    fn dangling_batch_leaves_store_untouched() {
        let mut g = GraphStore::new();
        g.advance_counter();
        let mut b = pair_batch();
        b.concepts.remove(&l("b"));
        let before = g.clone();
        assert!(g.merge_batch(&b).is_err());
        assert_eq!(g, before);
    }

    #[test]
    fn untouched_items_keep_their_index() {
        let mut g = GraphStore::new();
        g.advance_counter();
        g.merge_batch(&pair_batch()).unwrap();
        g.advance_counter();
        let other = ConceptBatch::from_occurrences([(l("c"), 0, "C.")]);
        g.merge_batch(&other).unwrap();
        assert_eq!(g.node(&l("a")).unwrap().temporal_index, 1);
        assert_eq!(g.node(&l("c")).unwrap().temporal_index, 2);
        assert_eq!(g.edge(&l("a"), &l("b")).unwrap().temporal_index, 1);
    }
}
