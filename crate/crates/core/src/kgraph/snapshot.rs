//! Versioned JSON snapshots.
//!
//! Document layout, keys sorted at every level:
//!
//! ```json
//! {
//!   "counter": 2,
//!   "edges": [{"a": "brandon", "b": "cisco", "strength": 2, "t": 2}],
//!   "nodes": {"brandon": {"context": "...", "merge_count": 2, "revisions_done": 0, "t": 2}},
//!   "version": 1
//! }
//! ```
//!
//! Edges are listed in canonical `(a, b)` order, so equal stores produce
//! byte-identical documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ConceptNode, GraphStore, Relation};
use crate::error::{Error, Result};
use crate::label::Label;

pub const SNAPSHOT_VERSION: u64 = 1;

// Field order is alphabetical so the serialized keys come out sorted.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotDoc {
    counter: u64,
    edges: Vec<EdgeDoc>,
    nodes: BTreeMap<String, NodeDoc>,
    version: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    a: Label,
    b: Label,
    strength: u64,
    t: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    context: String,
    merge_count: u64,
    revisions_done: u64,
    t: u64,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<u64>,
}

impl GraphStore {
    /// Serializes the store. Deterministic: equal stores give equal bytes.
    pub fn snapshot(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(&self.to_doc()).expect("snapshot documents always serialize")
    }

    /// The snapshot document as a JSON value (used by the HTTP export).
    pub fn snapshot_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_doc()).expect("snapshot documents always serialize")
    }

    fn to_doc(&self) -> SnapshotDoc {
        SnapshotDoc {
            counter: self.counter,
            edges: self
                .edges
                .values()
                .map(|e| EdgeDoc { a: e.a.clone(), b: e.b.clone(), strength: e.strength, t: e.temporal_index })
                .collect(),
            nodes: self
                .nodes
                .values()
                .map(|n| {
                    (
                        n.label.to_string(),
                        NodeDoc {
                            context: n.context.clone(),
                            merge_count: n.merge_count,
                            revisions_done: n.revisions_done,
                            t: n.temporal_index,
                        },
                    )
                })
                .collect(),
            version: SNAPSHOT_VERSION,
        }
    }

    /// Parses a snapshot produced by [`GraphStore::snapshot`].
    pub fn load(bytes: &[u8]) -> Result<Self> {
        let probe: VersionProbe = serde_json::from_slice(bytes).map_err(|e| parse_error(bytes, &e))?;
        match probe.version {
            Some(SNAPSHOT_VERSION) => {}
            Some(found) => return Err(Error::SnapshotVersion { found, expected: SNAPSHOT_VERSION }),
            None => {
                return Err(Error::SnapshotParse { offset: 0, message: "missing field `version`".into() })
            }
        }
        let doc: SnapshotDoc = serde_json::from_slice(bytes).map_err(|e| parse_error(bytes, &e))?;
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for (key, n) in doc.nodes {
            let label = Label::new(key).map_err(|e| Error::SnapshotInvalid(e.to_string()))?;
            nodes.push(ConceptNode {
                label,
                context: n.context,
                temporal_index: n.t,
                merge_count: n.merge_count,
                revisions_done: n.revisions_done,
            });
        }
        let edges = doc
            .edges
            .into_iter()
            .map(|e| Relation { a: e.a, b: e.b, strength: e.strength, temporal_index: e.t })
            .collect();
        GraphStore::from_parts(doc.counter, nodes, edges)
    }
}

/// Converts serde_json's 1-based line/column into a byte offset.
fn parse_error(bytes: &[u8], e: &serde_json::Error) -> Error {
    let mut offset = 0usize;
    if e.line() > 0 {
        for (i, line) in bytes.split(|b| *b == b'\n').enumerate() {
            if i + 1 == e.line() {
                offset += e.column().saturating_sub(1).min(line.len());
                break;
            }
            offset += line.len() + 1;
        }
    }
    Error::SnapshotParse { offset: offset.min(bytes.len()), message: e.to_string() }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Builds a store directly from `(label, T)` nodes and `(a, b, strength, T)` edges.
    pub(crate) fn store_from(counter: u64, nodes: &[(&str, u64)], edges: &[(&str, &str, u64, u64)]) -> GraphStore {
        let nodes = nodes
            .iter()
            .map(|(l, t)| ConceptNode {
                label: Label::new(*l).unwrap(),
                context: format!("{l} context."),
                temporal_index: *t,
                merge_count: 1,
                revisions_done: 0,
            })
            .collect();
        let edges = edges
            .iter()
            .map(|(a, b, s, t)| {
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                Relation { a: Label::new(*a).unwrap(), b: Label::new(*b).unwrap(), strength: *s, temporal_index: *t }
            })
            .collect();
        GraphStore::from_parts(counter, nodes, edges).unwrap()
    }

    #[test]
    fn empty_round_trip() {
        let g = GraphStore::new();
        let bytes = g.snapshot();
        assert_eq!(GraphStore::load(&bytes).unwrap(), g);
    }

    #[test]
    fn keys_are_sorted() {
        let g = store_from(4, &[("b", 4), ("a", 3)], &[("a", "b", 2, 3)]);
        let text = String::from_utf8(g.snapshot()).unwrap();
        let pos = |k: &str| text.find(k).unwrap();
        assert!(pos("\"counter\"") < pos("\"edges\""));
        assert!(pos("\"edges\"") < pos("\"nodes\""));
        assert!(pos("\"nodes\"") < pos("\"version\""));
        assert!(pos("\"context\"") < pos("\"merge_count\""));
        assert_eq!(GraphStore::load(text.as_bytes()).unwrap(), g);
    }

    #[test]
    fn malformed_reports_offset() {
        let bad = b"{\n  \"version\": 1,\n  \"counter\": oops\n}";
        match GraphStore::load(bad) {
            Err(Error::SnapshotParse { offset, .. }) => {
                assert_eq!(&bad[offset..offset + 1], b"o");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn version_mismatch() {
        let doc = br#"{"counter":0,"edges":[],"nodes":{},"version":7}"#;
        assert!(matches!(GraphStore::load(doc), Err(Error::SnapshotVersion { found: 7, expected: 1 })));
    }

    #[test]
    fn inconsistent_documents_rejected() {
        let missing_node = br#"{"counter":1,"edges":[{"a":"x","b":"y","strength":1,"t":1}],"nodes":{"x":{"context":"","merge_count":1,"revisions_done":0,"t":1}},"version":1}"#;
        assert!(matches!(GraphStore::load(missing_node), Err(Error::SnapshotInvalid(_))));
        let future = br#"{"counter":1,"edges":[],"nodes":{"x":{"context":"","merge_count":1,"revisions_done":0,"t":5}},"version":1}"#;
        assert!(matches!(GraphStore::load(future), Err(Error::SnapshotInvalid(_))));
        let unordered = br#"{"counter":1,"edges":[{"a":"y","b":"x","strength":1,"t":1}],"nodes":{"x":{"context":"","merge_count":1,"revisions_done":0,"t":1},"y":{"context":"","merge_count":1,"revisions_done":0,"t":1}},"version":1}"#;
        assert!(GraphStore::load(unordered).is_err());
    }
}
