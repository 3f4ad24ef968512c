//! Finite order-theoretic forests.
//!
//! An order-theoretic forest is a partial order in which every up-set
//! `[x, +inf)` is a chain; it is an order-theoretic tree when additionally
//! every two nodes have an upper bound. In the finite case each node has at
//! most one cover (the least strict upper bound), so the cover relation is an
//! ordinary forest of rooted trees and serializes compactly.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OForestError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("order is not antisymmetric: `{0}` <= `{1}` and `{1}` <= `{0}`")]
    NotAntisymmetric(String, String),
    #[error("order is not transitive: `{0}` <= `{1}` <= `{2}` but not `{0}` <= `{2}`")]
    NotTransitive(String, String, String),
    #[error("upper bounds of `{node}` are not a chain: `{a}` and `{b}` are incomparable")]
    UpSetNotChain { node: String, a: String, b: String },
    #[error("invalid serialized forest: {0}")]
    Json(String),
}

/// A finite order-theoretic forest: named nodes and the full `<=` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OForest {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    leq: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct OForestJson {
    nodes: Vec<String>,
    cover: Vec<(String, String)>,
}

impl OForest {
    /// Builds the forest generated by `pairs` (each `(x, y)` meaning
    /// `x <= y`): the reflexive-transitive closure is taken, then the
    /// order-theoretic forest conditions are checked.
    pub fn from_pairs<S: Into<String>>(
        nodes: impl IntoIterator<Item = S>,
        pairs: &[(&str, &str)],
    ) -> Result<OForest, OForestError> {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(OForestError::DuplicateNode(n.clone()));
            }
        }
        let n = nodes.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (a, b) in pairs {
            let &i = index
                .get(*a)
                .ok_or_else(|| OForestError::UnknownNode(a.to_string()))?;
            let &j = index
                .get(*b)
                .ok_or_else(|| OForestError::UnknownNode(b.to_string()))?;
            leq[i * n + j] = true;
        }
        // Warshall closure.
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        let f = OForest { nodes, index, leq };
        f.validate()?;
        Ok(f)
    }

    /// Wraps a precomputed `<=` matrix (row-major, `leq[i*n+j]` meaning
    /// `node i <= node j`) and checks the conditions.
    pub fn from_matrix(nodes: Vec<String>, leq: Vec<bool>) -> Result<OForest, OForestError> {
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(OForestError::DuplicateNode(n.clone()));
            }
        }
        assert_eq!(leq.len(), nodes.len() * nodes.len(), "matrix shape");
        let f = OForest { nodes, index, leq };
        f.validate()?;
        Ok(f)
    }

    /// Checks partial-order axioms and the chain condition on up-sets,
    /// reporting a witness on failure. Reflexivity cannot fail for values
    /// built by the constructors.
    pub fn validate(&self) -> Result<(), OForestError> {
        let n = self.nodes.len();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.leq_idx(i, j) && self.leq_idx(j, i) {
                    return Err(OForestError::NotAntisymmetric(
                        self.nodes[i].clone(),
                        self.nodes[j].clone(),
                    ));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !self.leq_idx(i, j) {
                    continue;
                }
                for k in 0..n {
                    if self.leq_idx(j, k) && !self.leq_idx(i, k) {
                        return Err(OForestError::NotTransitive(
                            self.nodes[i].clone(),
                            self.nodes[j].clone(),
                            self.nodes[k].clone(),
                        ));
                    }
                }
            }
        }
        for x in 0..n {
            for a in 0..n {
                if !self.leq_idx(x, a) {
                    continue;
                }
                for b in (a + 1)..n {
                    if self.leq_idx(x, b) && !self.leq_idx(a, b) && !self.leq_idx(b, a) {
                        return Err(OForestError::UpSetNotChain {
                            node: self.nodes[x].clone(),
                            a: self.nodes[a].clone(),
                            b: self.nodes[b].clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn leq_idx(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.nodes.len() + j]
    }

    pub fn lt_idx(&self, i: usize, j: usize) -> bool {
        i != j && self.leq_idx(i, j)
    }

    pub fn comparable_idx(&self, i: usize, j: usize) -> bool {
        self.leq_idx(i, j) || self.leq_idx(j, i)
    }

    pub fn leq(&self, a: &str, b: &str) -> Option<bool> {
        Some(self.leq_idx(self.node_index(a)?, self.node_index(b)?))
    }

    /// The least strict upper bound, i.e. the unique cover; `None` at roots.
    /// Well-defined because the strict up-set is a finite chain.
    pub fn parent(&self, i: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..self.nodes.len() {
            if self.lt_idx(i, j) && best.map_or(true, |b| self.leq_idx(j, b)) {
                best = Some(j);
            }
        }
        best
    }

    /// Strict upper bounds of `i`, smallest first (they form a chain).
    pub fn strict_up(&self, i: usize) -> Vec<usize> {
        let mut ups: Vec<usize> = (0..self.nodes.len()).filter(|&j| self.lt_idx(i, j)).collect();
        ups.sort_by(|&a, &b| {
            if a == b {
                std::cmp::Ordering::Equal
            } else if self.leq_idx(a, b) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        ups
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.parent(i).is_none()).collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| (0..self.nodes.len()).all(|j| !self.lt_idx(j, i)))
            .collect()
    }

    /// Is the whole forest a single order-theoretic tree?
    pub fn is_otree(&self) -> bool {
        !self.is_empty() && self.component_ids().iter().all(|&c| c == 0)
    }

    /// Every two nodes with an upper bound have a least upper bound. Finite
    /// order-theoretic forests always satisfy this (common upper bounds form
    /// a finite chain); the check follows the definition anyway.
    pub fn is_joinforest(&self) -> bool {
        let n = self.nodes.len();
        for i in 0..n {
            for j in i..n {
                let ubs: Vec<usize> = (0..n)
                    .filter(|&u| self.leq_idx(i, u) && self.leq_idx(j, u))
                    .collect();
                if ubs.is_empty() {
                    continue;
                }
                if !ubs.iter().any(|&m| ubs.iter().all(|&u| self.leq_idx(m, u))) {
                    return false;
                }
            }
        }
        true
    }

    /// An order-theoretic tree in which every two nodes have a join.
    pub fn is_jointree(&self) -> bool {
        self.is_otree() && self.is_joinforest()
    }

    /// The join of two nodes, when they have a common upper bound.
    pub fn join(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.nodes.len();
        let ubs: Vec<usize> = (0..n)
            .filter(|&u| self.leq_idx(i, u) && self.leq_idx(j, u))
            .collect();
        ubs.iter()
            .copied()
            .find(|&m| ubs.iter().all(|&u| self.leq_idx(m, u)))
    }

    /// Component id per node; two nodes share a component iff they have a
    /// common upper bound (equivalently, are connected in the comparability
    /// graph). Ids are dense and ordered by smallest member.
    pub fn component_ids(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut Vec<usize>, x: usize) -> usize {
            if uf[x] != x {
                let r = find(uf, uf[x]);
                uf[x] = r;
            }
            uf[x]
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.comparable_idx(i, j) {
                    let (a, b) = (find(&mut uf, i), find(&mut uf, j));
                    if a != b {
                        uf[a] = b;
                    }
                }
            }
        }
        let mut ids = BTreeMap::new();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let r = find(&mut uf, i);
            let fresh = ids.len();
            out.push(*ids.entry(r).or_insert(fresh));
        }
        out
    }

    /// The composing order-theoretic trees, as induced sub-forests.
    pub fn components(&self) -> Vec<OForest> {
        let ids = self.component_ids();
        let count = ids.iter().copied().max().map_or(0, |m| m + 1);
        (0..count)
            .map(|c| {
                let keep: Vec<usize> =
                    (0..self.nodes.len()).filter(|&i| ids[i] == c).collect();
                self.induced_idx(&keep)
            })
            .collect()
    }

    pub fn induced_idx(&self, keep: &[usize]) -> OForest {
        let nodes: Vec<String> = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let m = keep.len();
        let mut leq = vec![false; m * m];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                leq[a * m + b] = self.leq_idx(i, j);
            }
        }
        let index = nodes.iter().cloned().zip(0..).collect();
        // A restriction of a valid forest is valid.
        OForest { nodes, index, leq }
    }

    /// The sub-forest induced by the named nodes.
    pub fn induced(&self, keep: &BTreeSet<String>) -> Result<OForest, OForestError> {
        for k in keep {
            if !self.index.contains_key(k) {
                return Err(OForestError::UnknownNode(k.clone()));
            }
        }
        let idx: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| keep.contains(&self.nodes[i]))
            .collect();
        Ok(self.induced_idx(&idx))
    }

    /// Cover pairs `(lower, upper)`, the transitive reduction.
    pub fn cover_pairs(&self) -> Vec<(String, String)> {
        (0..self.nodes.len())
            .filter_map(|i| {
                self.parent(i)
                    .map(|p| (self.nodes[i].clone(), self.nodes[p].clone()))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = OForestJson { nodes: self.nodes.clone(), cover: self.cover_pairs() };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<OForest, OForestError> {
        let doc: OForestJson =
            serde_json::from_str(text).map_err(|e| OForestError::Json(e.to_string()))?;
        let pairs: Vec<(&str, &str)> = doc
            .cover
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        OForest::from_pairs(doc.nodes, &pairs)
    }

    /// Graphviz rendering: cover edges bottom-to-top.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph oforest {\n  rankdir=BT;\n  node [shape=circle];\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for (a, b) in self.cover_pairs() {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\";");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> OForest {
        OForest::from_pairs(["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    #[test]
    fn closure_and_accessors() {
        let f = chain3();
        assert_eq!(f.leq("a", "c"), Some(true));
        assert_eq!(f.leq("c", "a"), Some(false));
        assert_eq!(f.parent(f.node_index("a").unwrap()), f.node_index("b"));
        assert_eq!(f.parent(f.node_index("c").unwrap()), None);
        assert_eq!(f.roots(), vec![f.node_index("c").unwrap()]);
        assert_eq!(f.leaves(), vec![f.node_index("a").unwrap()]);
        assert_eq!(
            f.strict_up(f.node_index("a").unwrap()),
            vec![f.node_index("b").unwrap(), f.node_index("c").unwrap()]
        );
    }

    #[test]
    fn validation_witnesses() {
        assert_eq!(
            OForest::from_pairs(["a", "b"], &[("a", "b"), ("b", "a")]).unwrap_err(),
            OForestError::NotAntisymmetric("a".into(), "b".into())
        );
        // A node below two incomparable nodes breaks the chain condition.
        let err = OForest::from_pairs(["x", "p", "q"], &[("x", "p"), ("x", "q")]).unwrap_err();
        assert_eq!(
            err,
            OForestError::UpSetNotChain { node: "x".into(), a: "p".into(), b: "q".into() }
        );
        // Same for a diamond.
        let err =
            OForest::from_pairs(["x", "p", "q", "t"], &[("x", "p"), ("x", "q"), ("p", "t"), ("q", "t")])
                .unwrap_err();
        assert!(matches!(err, OForestError::UpSetNotChain { .. }));
        assert_eq!(
            OForest::from_pairs(["a", "a"], &[]).unwrap_err(),
            OForestError::DuplicateNode("a".into())
        );
        assert_eq!(
            OForest::from_pairs(["a"], &[("a", "z")]).unwrap_err(),
            OForestError::UnknownNode("z".into())
        );
    }

    #[test]
    fn raw_matrix_validation() {
        // Missing transitivity is caught on raw matrices.
        let nodes = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let mut leq = vec![false; 9];
        for i in 0..3 {
            leq[i * 3 + i] = true;
        }
        leq[0 * 3 + 1] = true;
        leq[1 * 3 + 2] = true;
        assert_eq!(
            OForest::from_matrix(nodes, leq).unwrap_err(),
            OForestError::NotTransitive("a".into(), "b".into(), "c".into())
        );
    }

    #[test]
    fn trees_and_components() {
        let f = chain3();
        assert!(f.is_otree());
        assert!(f.is_jointree());
        // Lambda shape: two leaves under one root.
        let lam = OForest::from_pairs(["r", "x", "y"], &[("x", "r"), ("y", "r")]).unwrap();
        assert!(lam.is_otree());
        assert_eq!(lam.join(1, 2), Some(0));
        // Two components.
        let two = OForest::from_pairs(["a", "b", "c"], &[("a", "b")]).unwrap();
        assert!(!two.is_otree());
        assert!(two.is_joinforest());
        assert_eq!(two.component_ids(), vec![0, 0, 1]);
        let comps = two.components();
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.is_otree()));
        assert_eq!(comps[1].nodes(), ["c"]);
        // Empty forest is not a tree.
        let empty = OForest::from_pairs(Vec::<String>::new(), &[]).unwrap();
        assert!(!empty.is_otree());
    }

    #[test]
    fn induced_restriction() {
        let f = chain3();
        let keep: BTreeSet<String> = ["a", "c"].iter().map(|s| s.to_string()).collect();
        let g = f.induced(&keep).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.leq("a", "c"), Some(true));
        assert_eq!(g.parent(g.node_index("a").unwrap()), g.node_index("c"));
        assert!(f.induced(&BTreeSet::from(["zz".to_string()])).is_err());
    }

    #[test]
    fn json_roundtrip_and_dot() {
        let lam = OForest::from_pairs(["r", "x", "y"], &[("x", "r"), ("y", "r")]).unwrap();
        let back = OForest::from_json(&lam.to_json()).unwrap();
        assert_eq!(back, lam);
        let dot = lam.to_dot();
        assert!(dot.contains("\"x\" -> \"r\""));
        assert!(dot.contains("rankdir=BT"));
        assert!(OForest::from_json("{\"nodes\": [\"a\"]}").is_err());
    }

    #[test]
    fn finite_forests_are_join_forests() {
        // Exhaustive over all parent functions on 4 nodes: every finite
        // forest built from parent links is a join-forest.
        let names = ["a", "b", "c", "d"];
        for mask in 0..(5usize.pow(3)) {
            // node 0 is always a root; nodes 1..3 pick a parent among
            // earlier nodes or none (encoded base 5: 0 none, i+1 parent i).
            let mut code = mask;
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            let mut ok = true;
            for i in 1..4 {
                let p = code % 5;
                code /= 5;
                if p > 0 {
                    let parent = p - 1;
                    if parent >= i {
                        ok = false;
                        break;
                    }
                    pairs.push((i, parent));
                }
            }
            if !ok {
                continue;
            }
            let pairs: Vec<(&str, &str)> =
                pairs.iter().map(|&(a, b)| (names[a], names[b])).collect();
            let f = OForest::from_pairs(names, &pairs).unwrap();
            assert!(f.is_joinforest());
            assert_eq!(f.is_jointree(), f.is_otree());
        }
    }
}
