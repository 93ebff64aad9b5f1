use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ConceptNode, GraphStore, Relation};
use crate::error::{Error, Result};
use crate::label::Label;
use crate::num::Scalar;

/// Size `s` of the temporal window used at question time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Option<u64>", into = "Option<u64>")]
pub enum TemporalWindow {
    Limited(u64),
    Unlimited,
}

impl Default for TemporalWindow {
    fn default() -> Self {
        TemporalWindow::Limited(3)
    }
}

impl From<Option<u64>> for TemporalWindow {
    fn from(v: Option<u64>) -> Self {
        v.map_or(TemporalWindow::Unlimited, TemporalWindow::Limited)
    }
}

impl From<TemporalWindow> for Option<u64> {
    fn from(w: TemporalWindow) -> Self {
        match w {
            TemporalWindow::Limited(s) => Some(s),
            TemporalWindow::Unlimited => None,
        }
    }
}

impl std::fmt::Display for TemporalWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TemporalWindow::Limited(s) => write!(f, "{s}"),
            TemporalWindow::Unlimited => f.write_str("unlimited"),
        }
    }
}

impl std::str::FromStr for TemporalWindow {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "unlimited" | "none" | "inf" => Ok(TemporalWindow::Unlimited),
            n => n.parse().map(TemporalWindow::Limited).map_err(|e| format!("temporal window {s:?}: {e}")),
        }
    }
}

impl TemporalWindow {
    /// `T(N) − s ≤ T(E) ≤ T(c)`.
    pub fn admits(self, edge_t: u64, node_t: u64, root_t: u64) -> bool {
        if edge_t > root_t {
            return false;
        }
        match self {
            TemporalWindow::Limited(s) => node_t <= edge_t.saturating_add(s),
            TemporalWindow::Unlimited => true,
        }
    }
}

/// A concept reached from a root under the distance and window constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighbor<'a> {
    pub node: &'a ConceptNode,
    /// Length of the shortest qualifying path from the root.
    pub distance: usize,
    /// Edges incident to `node` on its shortest qualifying paths, ordered by
    /// the label of their other endpoint.
    pub via: Vec<&'a Relation>,
}

impl<'a> Neighbor<'a> {
    /// The scoring relation: the `via` edge maximizing `strength + α·T(E)`,
    /// ties to the higher `T(E)`, then to the earlier entry in `via`.
    pub fn scoring_relation<F: Scalar>(&self, alpha: F) -> &'a Relation {
        let mut best = self.via[0];
        for rel in &self.via[1..] {
            let (s_new, s_best) = (relation_score(rel, alpha), relation_score(best, alpha));
            if s_new > s_best || (s_new == s_best && rel.temporal_index > best.temporal_index) {
                best = rel;
            }
        }
        best
    }
}

/// `s(r) + α·t(r)`.
pub fn relation_score<F: Scalar>(rel: &Relation, alpha: F) -> F {
    F::from_count(rel.strength) + alpha * F::from_count(rel.temporal_index)
}

impl GraphStore {
    /// All concepts within `max_distance` hops of `essential` where every
    /// traversed edge `E` into a node `N` satisfies `T(N) − s ≤ T(E) ≤ T(c)`
    /// against the root `c`. The root itself is never returned.
    ///
    /// An unknown root yields an empty list. Results are ordered by distance,
    /// then label.
    pub fn neighbors(
        &self,
        essential: &Label,
        max_distance: usize,
        window: TemporalWindow,
    ) -> Result<Vec<Neighbor<'_>>> {
        if max_distance < 1 {
            return Err(Error::InvalidArgument("max distance must be at least 1".into()));
        }
        let Some(root) = self.nodes.get(essential) else {
            return Ok(Vec::new());
        };
        let root_t = root.temporal_index;
        let mut visited: BTreeSet<&Label> = BTreeSet::from([&root.label]);
        let mut frontier: Vec<&Label> = vec![&root.label];
        let mut out = Vec::new();

        for distance in 1..=max_distance {
            let mut layer: BTreeMap<&Label, Vec<&Relation>> = BTreeMap::new();
            for u in &frontier {
                for v in self.adjacent(u) {
                    if visited.contains(v) {
                        continue;
                    }
                    let rel = self.edge(u, v).expect("adjacency mirrors edges");
                    let node = &self.nodes[v];
                    if window.admits(rel.temporal_index, node.temporal_index, root_t) {
                        layer.entry(v).or_default().push(rel);
                    }
                }
            }
            if layer.is_empty() {
                break;
            }
            frontier = layer.keys().copied().collect();
            for (label, mut via) in layer {
                visited.insert(label);
                via.sort_by(|x, y| x.other(label).cmp(y.other(label)));
                out.push(Neighbor { node: &self.nodes[label], distance, via });
            }
        }
        Ok(out)
    }

    /// [`GraphStore::neighbors`] with each node paired with its scoring relation.
    pub fn scored_neighbors<F: Scalar>(
        &self,
        essential: &Label,
        max_distance: usize,
        window: TemporalWindow,
        alpha: F,
    ) -> Result<Vec<(&ConceptNode, &Relation)>> {
        Ok(self
            .neighbors(essential, max_distance, window)?
            .into_iter()
            .map(|n| (n.node, n.scoring_relation(alpha)))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgraph::snapshot::tests::store_from;

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn labels(ns: &[Neighbor<'_>]) -> Vec<String> {
        ns.iter().map(|n| n.node.label.to_string()).collect()
    }

    #[test]
    fn window_inequality_included() {
        // T(c)=10, s=3, T(N)=8, T(E)=6: 5 <= 6 <= 10
        let g = store_from(12, &[("c", 10), ("n", 8)], &[("c", "n", 1, 6)]);
        let r = g.neighbors(&l("c"), 1, TemporalWindow::Limited(3)).unwrap();
        assert_eq!(labels(&r), vec!["n"]);
    }

    #[test]
    fn window_inequality_excluded() {
        // T(N)=12: 9 > 6
        let g = store_from(12, &[("c", 10), ("n", 12)], &[("c", "n", 1, 6)]);
        let r = g.neighbors(&l("c"), 1, TemporalWindow::Limited(3)).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn edge_newer_than_root_is_excluded() {
        let g = store_from(12, &[("c", 5), ("x", 5), ("y", 9)], &[("c", "x", 1, 5), ("x", "y", 1, 9)]);
        let r = g.neighbors(&l("c"), 2, TemporalWindow::Unlimited).unwrap();
        assert_eq!(labels(&r), vec!["x"]);
    }

    #[test]
    fn chain_distance() {
        let g = store_from(3, &[("c", 3), ("x", 3), ("y", 3)], &[("c", "x", 1, 3), ("x", "y", 1, 3)]);
        let two = g.neighbors(&l("c"), 2, TemporalWindow::Unlimited).unwrap();
        assert_eq!(labels(&two), vec!["x", "y"]);
        assert_eq!(two[1].distance, 2);
        let one = g.neighbors(&l("c"), 1, TemporalWindow::Unlimited).unwrap();
        assert_eq!(labels(&one), vec!["x"]);
    }

    #[test]
    fn unknown_root_and_bad_distance() {
        let g = store_from(1, &[("c", 1)], &[]);
        assert!(g.neighbors(&l("zzz"), 2, TemporalWindow::default()).unwrap().is_empty());
        assert!(matches!(g.neighbors(&l("c"), 0, TemporalWindow::default()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn scoring_relation_prefers_best_shortest_path_edge() {
        // c-x and c-y both lead to z at distance 2; y-z scores higher.
        let g = store_from(
            9,
            &[("c", 9), ("x", 9), ("y", 9), ("z", 9)],
            &[("c", "x", 1, 9), ("c", "y", 1, 9), ("x", "z", 1, 4), ("y", "z", 2, 4)],
        );
        let r = g.neighbors(&l("c"), 2, TemporalWindow::Unlimited).unwrap();
        let z = r.iter().find(|n| n.node.label == "z").unwrap();
        assert_eq!(z.via.len(), 2);
        let best = z.scoring_relation(3.0f64);
        assert_eq!(best.other(&l("z")), &l("y"));
        let scored = g.scored_neighbors(&l("c"), 2, TemporalWindow::Unlimited, 3.0f64).unwrap();
        assert_eq!(scored.len(), 3);
    }

    #[test]
    fn window_parse_and_display() {
        assert_eq!("unlimited".parse::<TemporalWindow>().unwrap(), TemporalWindow::Unlimited);
        assert_eq!("3".parse::<TemporalWindow>().unwrap(), TemporalWindow::Limited(3));
        assert!("x".parse::<TemporalWindow>().is_err());
        assert_eq!(TemporalWindow::default().to_string(), "3");
    }
}
