//! Structurings: partitions of an order-theoretic forest into lines.
//!
//! A structuring partitions the nodes into nonempty convex chains (lines)
//! such that every up-set `[x, +inf)` decomposes into intervals lying in
//! pairwise distinct lines, each upwards closed in its line. The number of
//! intervals minus one is the depth of `x`; depth is constant along a line.
//!
//! A line `U` is related to deeper material in exactly two ways: a node `x`
//! outside `U` that is below part of `U` and incomparable with the rest
//! defines a cut of `U`, and a node below all of `U` belongs to the tail of
//! `U`. Inserting cut symbols into `U` and prefixing a tail symbol yields
//! the extended arrangement `U+`; substituting the defining forests back
//! into `U+` reconstructs the sub-forest hanging from `U` exactly.

use crate::arrangement::{cuts_extend, Entry, FiniteArrangement, LinearCut};
use crate::oforest::{OForest, OForestError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StructuringError {
    #[error(transparent)]
    Forest(#[from] OForestError),
    #[error("node `{0}` is not covered by any line")]
    NodeUncovered(String),
    #[error("node `{0}` appears in two lines")]
    NodeTwice(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("line {0} is empty")]
    EmptyLine(usize),
    #[error("line {line} is not a chain: `{a}` and `{b}` are incomparable")]
    LineNotChain { line: usize, a: String, b: String },
    #[error("line {line} is not convex: `{between}` lies between `{a}` and `{b}`")]
    LineNotConvex { line: usize, a: String, b: String, between: String },
    #[error("up-set of `{node}` meets line {line} in two separated intervals")]
    SplitInterval { node: String, line: usize },
    #[error("axis is not upwards closed: `{above}` lies above axis node `{node}`")]
    AxisNotUpwardsClosed { node: String, above: String },
    #[error("axis index {0} out of range")]
    BadAxis(usize),
    #[error("no line with index {0}")]
    NoSuchLine(usize),
    #[error("substitution target `{0}` is not an element of the order")]
    BadSubstitutionKey(String),
    #[error("node name `{0}` occurs in two substituted forests")]
    SubstitutionClash(String),
    #[error("invalid serialized structuring: {0}")]
    Json(String),
}

/// A cut of a line, identified by the line and the size of the lower part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cut {
    pub line: usize,
    pub left_size: usize,
}

impl Cut {
    /// Stable textual key, also used as the symbol in extended arrangements.
    pub fn key(&self) -> String {
        format!("k{}.{}", self.line, self.left_size)
    }
}

/// A structured order-theoretic forest with an optional distinguished axis
/// (an upwards closed line).
#[derive(Clone, Debug)]
pub struct SOAForest {
    forest: OForest,
    lines: Vec<Vec<usize>>,
    line_of: Vec<usize>,
    axis: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct SOAForestJson {
    nodes: Vec<String>,
    cover: Vec<(String, String)>,
    lines: Vec<Vec<String>>,
    axis: Option<usize>,
}

impl SOAForest {
    /// Checks that `lines` structure `forest`; elements of a line may be
    /// listed in any order.
    pub fn new(
        forest: OForest,
        lines: Vec<Vec<String>>,
        axis: Option<usize>,
    ) -> Result<SOAForest, StructuringError> {
        let n = forest.len();
        let mut line_of = vec![usize::MAX; n];
        let mut resolved: Vec<Vec<usize>> = Vec::with_capacity(lines.len());
        for (li, line) in lines.iter().enumerate() {
            if line.is_empty() {
                return Err(StructuringError::EmptyLine(li));
            }
            let mut ids = Vec::with_capacity(line.len());
            for name in line {
                let i = forest
                    .node_index(name)
                    .ok_or_else(|| StructuringError::UnknownNode(name.clone()))?;
                if line_of[i] != usize::MAX {
                    return Err(StructuringError::NodeTwice(name.clone()));
                }
                line_of[i] = li;
                ids.push(i);
            }
            ids.sort_by(|&a, &b| {
                if a == b {
                    std::cmp::Ordering::Equal
                } else if forest.leq_idx(a, b) {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                }
            });
            resolved.push(ids);
        }
        for i in 0..n {
            if line_of[i] == usize::MAX {
                return Err(StructuringError::NodeUncovered(forest.name(i).to_string()));
            }
        }
        if let Some(a) = axis {
            if a >= resolved.len() {
                return Err(StructuringError::BadAxis(a));
            }
        }
        let s = SOAForest { forest, lines: resolved, line_of, axis };
        s.validate()?;
        Ok(s)
    }

    /// Structuring conditions: each line is a convex chain, each up-set
    /// meets each line in at most one interval, and the axis (if any) is
    /// upwards closed.
    pub fn validate(&self) -> Result<(), StructuringError> {
        let n = self.forest.len();
        for (li, line) in self.lines.iter().enumerate() {
            for (ai, &a) in line.iter().enumerate() {
                for &b in &line[ai + 1..] {
                    if !self.forest.comparable_idx(a, b) {
                        return Err(StructuringError::LineNotChain {
                            line: li,
                            a: self.forest.name(a).to_string(),
                            b: self.forest.name(b).to_string(),
                        });
                    }
                }
            }
            // Convexity: nothing outside the line between two of its nodes.
            for &a in line {
                for &b in line {
                    if !self.forest.lt_idx(a, b) {
                        continue;
                    }
                    for z in 0..n {
                        if self.line_of[z] != li
                            && self.forest.lt_idx(a, z)
                            && self.forest.lt_idx(z, b)
                        {
                            return Err(StructuringError::LineNotConvex {
                                line: li,
                                a: self.forest.name(a).to_string(),
                                b: self.forest.name(b).to_string(),
                                between: self.forest.name(z).to_string(),
                            });
                        }
                    }
                }
            }
        }
        // Interval decomposition of every up-set: no line recurs in two
        // separated runs along the chain above a node.
        for x in 0..n {
            let runs = self.up_runs(x);
            let mut seen = BTreeSet::new();
            for &(li, _) in &runs {
                if !seen.insert(li) {
                    return Err(StructuringError::SplitInterval {
                        node: self.forest.name(x).to_string(),
                        line: li,
                    });
                }
            }
        }
        if let Some(a) = self.axis {
            for &u in &self.lines[a] {
                for v in 0..n {
                    if self.forest.lt_idx(u, v) && self.line_of[v] != a {
                        return Err(StructuringError::AxisNotUpwardsClosed {
                            node: self.forest.name(u).to_string(),
                            above: self.forest.name(v).to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Maximal runs of same-line nodes along `[x, +inf)`, bottom to top:
    /// `(line, nodes of the run ascending)`.
    fn up_runs(&self, x: usize) -> Vec<(usize, Vec<usize>)> {
        let mut chain = vec![x];
        chain.extend(self.forest.strict_up(x));
        let mut runs: Vec<(usize, Vec<usize>)> = Vec::new();
        for i in chain {
            match runs.last_mut() {
                Some((li, nodes)) if *li == self.line_of[i] => nodes.push(i),
                _ => runs.push((self.line_of[i], vec![i])),
            }
        }
        runs
    }

    pub fn forest(&self) -> &OForest {
        &self.forest
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    /// Nodes of a line, ascending.
    pub fn line(&self, li: usize) -> &[usize] {
        &self.lines[li]
    }

    pub fn line_names(&self, li: usize) -> Vec<&str> {
        self.lines[li].iter().map(|&i| self.forest.name(i)).collect()
    }

    pub fn line_of(&self, node: usize) -> usize {
        self.line_of[node]
    }

    pub fn line_of_name(&self, name: &str) -> Option<usize> {
        self.forest.node_index(name).map(|i| self.line_of[i])
    }

    pub fn axis(&self) -> Option<usize> {
        self.axis
    }

    /// The same structuring with a different distinguished axis; the new
    /// axis must be an upwards closed line.
    pub fn with_axis(&self, axis: Option<usize>) -> SOAForest {
        let mut out = self.clone();
        out.axis = axis;
        out.validate().expect("axis must be upwards closed");
        out
    }

    /// Number of line changes along the up-set of `node`.
    pub fn depth(&self, node: usize) -> usize {
        self.up_runs(node).len() - 1
    }

    pub fn depth_of_name(&self, name: &str) -> Option<usize> {
        self.forest.node_index(name).map(|i| self.depth(i))
    }

    /// Depth is constant along a line.
    pub fn line_depth(&self, li: usize) -> usize {
        self.depth(self.lines[li][0])
    }

    /// The part of the up-set of `node` outside its own line, ascending.
    pub fn beta(&self, node: usize) -> Vec<usize> {
        let own = self.line_of[node];
        let mut out = Vec::new();
        for (li, nodes) in self.up_runs(node) {
            if li != own {
                out.extend(nodes);
            }
        }
        out
    }

    /// Lines of depth 0: the axes of the composing structured trees.
    pub fn axes(&self) -> Vec<usize> {
        (0..self.lines.len()).filter(|&li| self.line_depth(li) == 0).collect()
    }

    /// Does the line `upper` cover the line `lower`: some upper node is
    /// above all of `lower`, and anything strictly between `lower` and an
    /// upper node belongs to `upper`.
    pub fn covers(&self, lower: usize, upper: usize) -> bool {
        let n = self.forest.len();
        let below_all = |x: usize, line: &[usize]| line.iter().all(|&u| self.forest.lt_idx(u, x));
        if !self.lines[upper].iter().any(|&w| below_all(w, &self.lines[lower])) {
            return false;
        }
        for x in 0..n {
            for &w in &self.lines[upper] {
                if below_all(x, &self.lines[lower])
                    && self.forest.lt_idx(x, w)
                    && self.line_of[x] != upper
                {
                    return false;
                }
            }
        }
        true
    }

    /// The cut of line `li` defined by `x`, if any: `x` is outside the
    /// line, below a nonempty upper part and incomparable with the
    /// nonempty remainder.
    pub fn defines_cut(&self, li: usize, x: usize) -> Option<Cut> {
        if self.line_of[x] == li {
            return None;
        }
        let line = &self.lines[li];
        let upper: usize = line.iter().filter(|&&u| self.forest.leq_idx(x, u)).count();
        let left_size = line.len() - upper;
        if upper == 0 || left_size == 0 {
            return None;
        }
        // Convexity already forbids line nodes strictly below x, so the
        // remainder is automatically incomparable with x.
        debug_assert!(line[..left_size]
            .iter()
            .all(|&u| !self.forest.comparable_idx(x, u)));
        Some(Cut { line: li, left_size })
    }

    /// All cuts of a line, in order (by lower-part inclusion).
    pub fn cuts(&self, li: usize) -> Vec<Cut> {
        let set: BTreeSet<Cut> = (0..self.forest.len())
            .filter_map(|x| self.defines_cut(li, x))
            .collect();
        set.into_iter().collect()
    }

    /// All cuts of all lines.
    pub fn all_cuts(&self) -> Vec<Cut> {
        (0..self.lines.len()).flat_map(|li| self.cuts(li)).collect()
    }

    /// The nodes defining a given cut, ascending by node index.
    pub fn definers(&self, cut: Cut) -> Vec<usize> {
        (0..self.forest.len())
            .filter(|&x| self.defines_cut(cut.line, x) == Some(cut))
            .collect()
    }

    /// The structured forest (without axis) induced by the definers of a cut.
    pub fn def_of(&self, cut: Cut) -> SOAForest {
        self.induced_no_axis(&self.definers(cut))
    }

    /// Nodes strictly below every node of the line.
    pub fn tail_nodes(&self, li: usize) -> Vec<usize> {
        (0..self.forest.len())
            .filter(|&x| self.lines[li].iter().all(|&u| self.forest.lt_idx(x, u)))
            .collect()
    }

    /// The structured forest (without axis) below the whole line; may be
    /// empty.
    pub fn tail(&self, li: usize) -> SOAForest {
        self.induced_no_axis(&self.tail_nodes(li))
    }

    fn induced_no_axis(&self, keep: &[usize]) -> SOAForest {
        let forest = self.forest.induced_idx(keep);
        let mut per_line: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for &i in keep {
            per_line
                .entry(self.line_of[i])
                .or_default()
                .push(self.forest.name(i).to_string());
        }
        let lines: Vec<Vec<String>> = per_line.into_values().collect();
        SOAForest::new(forest, lines, None).expect("restriction of a structuring")
    }

    /// The symbol marking the tail of a line in extended arrangements.
    pub fn tail_key(&self, li: usize) -> String {
        format!("tau:{li}")
    }

    /// The extended arrangement of a line: optional tail symbol first, then
    /// the line with its cut symbols inserted. Nodes are keyed by name and
    /// labelled `*`; cuts and the tail symbol are labelled by their keys.
    pub fn u_plus(&self, li: usize) -> FiniteArrangement {
        let base = FiniteArrangement::from_entries(
            self.lines[li]
                .iter()
                .map(|&i| Entry { key: self.forest.name(i).to_string(), label: "*".into() })
                .collect(),
        );
        let cuts: Vec<LinearCut> = self
            .cuts(li)
            .into_iter()
            .map(|c| LinearCut { left_size: c.left_size, label: c.key() })
            .collect();
        let mut ext = cuts_extend(&base, &cuts).expect("cuts are valid by construction");
        // Re-key cut entries with their stable keys.
        let entries: Vec<Entry> = ext
            .entries()
            .iter()
            .map(|e| {
                if let Some(size) = e.key.strip_prefix("cut:") {
                    let c = Cut { line: li, left_size: size.parse().unwrap() };
                    Entry { key: c.key(), label: c.key() }
                } else {
                    e.clone()
                }
            })
            .collect();
        ext = FiniteArrangement::from_entries(entries);
        if self.tail_nodes(li).is_empty() {
            ext
        } else {
            let tau = FiniteArrangement::from_entries(vec![Entry {
                key: self.tail_key(li),
                label: "tau".into(),
            }]);
            let mut es = tau.entries().to_vec();
            es.extend(ext.entries().iter().cloned());
            FiniteArrangement::from_entries(es)
        }
    }

    /// The structured tree hanging from a line: the downward closure of the
    /// line, with the line as axis.
    pub fn down(&self, li: usize) -> SOAForest {
        let keep: Vec<usize> = (0..self.forest.len())
            .filter(|&x| self.lines[li].iter().any(|&u| self.forest.leq_idx(x, u)))
            .collect();
        let forest = self.forest.induced_idx(&keep);
        let mut per_line: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for &i in &keep {
            per_line
                .entry(self.line_of[i])
                .or_default()
                .push(self.forest.name(i).to_string());
        }
        let mut lines = Vec::new();
        let mut axis = None;
        for (orig, names) in per_line {
            if orig == li {
                axis = Some(lines.len());
            }
            lines.push(names);
        }
        SOAForest::new(forest, lines, axis).expect("downward closure of a structuring")
    }

    /// The restriction to a node subset: the nonempty intersections of the
    /// lines structure the induced forest. The axis survives iff it still
    /// has nodes.
    pub fn induced(&self, keep: &BTreeSet<String>) -> Result<SOAForest, StructuringError> {
        for k in keep {
            if self.forest.node_index(k).is_none() {
                return Err(StructuringError::UnknownNode(k.clone()));
            }
        }
        let idx: Vec<usize> = (0..self.forest.len())
            .filter(|&i| keep.contains(self.forest.name(i)))
            .collect();
        let forest = self.forest.induced_idx(&idx);
        let mut per_line: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for &i in &idx {
            per_line
                .entry(self.line_of[i])
                .or_default()
                .push(self.forest.name(i).to_string());
        }
        let mut lines = Vec::new();
        let mut axis = None;
        for (orig, names) in per_line {
            if Some(orig) == self.axis {
                axis = Some(lines.len());
            }
            lines.push(names);
        }
        SOAForest::new(forest, lines, axis)
    }

    /// The decomposition of `down(li)` promised by the reconstruction
    /// identity: the extended arrangement, the defining forest of each cut
    /// (keyed by cut key), and the tail if nonempty (keyed by the tail
    /// symbol).
    pub fn well_defining_triple(
        &self,
        li: usize,
    ) -> (FiniteArrangement, BTreeMap<String, SOAForest>, Option<SOAForest>) {
        let u_plus = self.u_plus(li);
        let mut subs = BTreeMap::new();
        for cut in self.cuts(li) {
            subs.insert(cut.key(), self.def_of(cut));
        }
        let tail = self.tail(li);
        let tail = if tail.forest().is_empty() { None } else { Some(tail) };
        (u_plus, subs, tail)
    }

    /// Substitutes the triple back; equal (node for node) to `down(li)`.
    pub fn recompose(&self, li: usize) -> Result<SOAForest, StructuringError> {
        let (u_plus, mut subs, tail) = self.well_defining_triple(li);
        if let Some(t) = tail {
            subs.insert(self.tail_key(li), t);
        }
        substitute(&u_plus, &subs)
    }

    pub fn to_json(&self) -> String {
        let doc = SOAForestJson {
            nodes: self.forest.nodes().to_vec(),
            cover: self.forest.cover_pairs(),
            lines: self
                .lines
                .iter()
                .map(|l| l.iter().map(|&i| self.forest.name(i).to_string()).collect())
                .collect(),
            axis: self.axis,
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<SOAForest, StructuringError> {
        let doc: SOAForestJson =
            serde_json::from_str(text).map_err(|e| StructuringError::Json(e.to_string()))?;
        let pairs: Vec<(&str, &str)> = doc
            .cover
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let forest = OForest::from_pairs(doc.nodes, &pairs)?;
        SOAForest::new(forest, doc.lines, doc.axis)
    }

    /// Graphviz rendering: nodes colored by line, axis nodes bold.
    pub fn to_dot(&self) -> String {
        const PALETTE: [&str; 8] = [
            "lightblue", "lightsalmon", "palegreen", "plum", "khaki", "lightpink", "lightgray",
            "aquamarine",
        ];
        let mut out =
            String::from("digraph soaforest {\n  rankdir=BT;\n  node [style=filled];\n");
        for i in 0..self.forest.len() {
            let li = self.line_of[i];
            let color = PALETTE[li % PALETTE.len()];
            let bold = if self.axis == Some(li) { ", penwidth=3" } else { "" };
            let _ = writeln!(
                out,
                "  \"{}\" [fillcolor={color}{bold}];",
                self.forest.name(i)
            );
        }
        for (a, b) in self.forest.cover_pairs() {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\";");
        }
        out.push_str("}\n");
        out
    }
}

/// Semantic equality: same nodes, same order, same partition into lines,
/// same axis content. Line numbering is irrelevant.
impl PartialEq for SOAForest {
    fn eq(&self, other: &Self) -> bool {
        let names = |f: &SOAForest| -> BTreeSet<String> {
            f.forest.nodes().iter().cloned().collect()
        };
        if names(self) != names(other) {
            return false;
        }
        for a in self.forest.nodes() {
            for b in self.forest.nodes() {
                if self.forest.leq(a, b) != other.forest.leq(a, b) {
                    return false;
                }
            }
        }
        let line_sets = |f: &SOAForest| -> BTreeSet<BTreeSet<String>> {
            f.lines
                .iter()
                .map(|l| l.iter().map(|&i| f.forest.name(i).to_string()).collect())
                .collect()
        };
        if line_sets(self) != line_sets(other) {
            return false;
        }
        let axis_set = |f: &SOAForest| -> Option<BTreeSet<String>> {
            f.axis.map(|a| {
                f.lines[a]
                    .iter()
                    .map(|&i| f.forest.name(i).to_string())
                    .collect()
            })
        };
        axis_set(self) == axis_set(other)
    }
}

impl Eq for SOAForest {}

/// Substitutes structured forests for selected elements of a finite linear
/// order: remaining elements become the axis, a substituted forest sits
/// below exactly the remaining elements above its slot.
pub fn substitute(
    h: &FiniteArrangement,
    subs: &BTreeMap<String, SOAForest>,
) -> Result<SOAForest, StructuringError> {
    let keys: BTreeSet<&str> = h.entries().iter().map(|e| e.key.as_str()).collect();
    for k in subs.keys() {
        if !keys.contains(k.as_str()) {
            return Err(StructuringError::BadSubstitutionKey(k.clone()));
        }
    }
    // Node inventory: remaining elements keep their keys as names.
    let mut names: Vec<String> = Vec::new();
    let mut owner: Vec<Option<usize>> = Vec::new(); // index into slot list
    let mut slot_pos: Vec<usize> = Vec::new(); // position in h of each slot
    let mut slots: Vec<&SOAForest> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut remaining_pos: BTreeMap<String, usize> = BTreeMap::new();
    for (pos, e) in h.entries().iter().enumerate() {
        match subs.get(&e.key) {
            Some(f) => {
                let slot = slots.len();
                slots.push(f);
                slot_pos.push(pos);
                for n in f.forest().nodes() {
                    if !seen.insert(n.clone()) {
                        return Err(StructuringError::SubstitutionClash(n.clone()));
                    }
                    names.push(n.clone());
                    owner.push(Some(slot));
                }
            }
            None => {
                if !seen.insert(e.key.clone()) {
                    return Err(StructuringError::SubstitutionClash(e.key.clone()));
                }
                remaining_pos.insert(e.key.clone(), pos);
                names.push(e.key.clone());
                owner.push(None);
            }
        }
    }
    let n = names.len();
    let mut leq = vec![false; n * n];
    let pos_of = |i: usize, owner: &[Option<usize>]| -> usize {
        match owner[i] {
            Some(s) => slot_pos[s],
            None => remaining_pos[&names[i]],
        }
    };
    for i in 0..n {
        for j in 0..n {
            let rel = match (owner[i], owner[j]) {
                (None, None) => pos_of(i, &owner) <= pos_of(j, &owner),
                (Some(si), Some(sj)) if si == sj => slots[si]
                    .forest()
                    .leq(&names[i], &names[j])
                    .expect("own nodes"),
                (Some(si), None) => slot_pos[si] < pos_of(j, &owner),
                _ => false,
            };
            if rel {
                leq[i * n + j] = true;
            }
        }
    }
    let forest = OForest::from_matrix(names.clone(), leq)?;
    let mut lines: Vec<Vec<String>> = Vec::new();
    let axis_line: Vec<String> = h
        .entries()
        .iter()
        .filter(|e| !subs.contains_key(&e.key))
        .map(|e| e.key.clone())
        .collect();
    let mut axis = None;
    if !axis_line.is_empty() {
        axis = Some(0);
        lines.push(axis_line);
    }
    for f in &slots {
        for li in 0..f.line_count() {
            lines.push(f.line_names(li).iter().map(|s| s.to_string()).collect());
        }
    }
    SOAForest::new(forest, lines, axis)
}

/// Builds a structuring of a forest greedily: repeatedly take a maximal
/// chain through the first uncovered node (scanning nodes in their given
/// order) and keep its uncovered part as a new line. Maximal chains are
/// convex, so this satisfies the structuring conditions; all tails are
/// empty. The axis is line 0 when the forest is a single tree.
pub fn build_structuring(forest: &OForest) -> SOAForest {
    let n = forest.len();
    let mut covered = vec![false; n];
    let mut lines: Vec<Vec<String>> = Vec::new();
    for first in 0..n {
        if covered[first] {
            continue;
        }
        let mut chain = vec![first];
        for cand in 0..n {
            if cand != first && chain.iter().all(|&c| forest.comparable_idx(c, cand)) {
                chain.push(cand);
            }
        }
        let fresh: Vec<String> = chain
            .iter()
            .filter(|&&c| !covered[c])
            .map(|&c| forest.name(c).to_string())
            .collect();
        for &c in &chain {
            covered[c] = true;
        }
        lines.push(fresh);
    }
    let axis = forest.is_otree().then_some(0);
    SOAForest::new(forest.clone(), lines, axis).expect("greedy maximal chains structure the forest")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A structured tree with axis {a1 < a2} and lines B={b1}, C={c1},
    /// D={d1}, E={e1}; b1 and d1 hang below a2, c1 below b1, e1 below d1.
    fn fig_tree() -> SOAForest {
        let forest = OForest::from_pairs(
            ["a1", "a2", "b1", "c1", "d1", "e1"],
            &[("a1", "a2"), ("b1", "a2"), ("c1", "b1"), ("d1", "a2"), ("e1", "d1")],
        )
        .unwrap();
        SOAForest::new(
            forest,
            vec![
                vec!["a1".into(), "a2".into()],
                vec!["b1".into()],
                vec!["c1".into()],
                vec!["d1".into()],
                vec!["e1".into()],
            ],
            Some(0),
        )
        .unwrap()
    }

    #[test]
    fn depths_lines_beta() {
        let s = fig_tree();
        for (name, d) in [("a1", 0), ("a2", 0), ("b1", 1), ("d1", 1), ("c1", 2), ("e1", 2)] {
            assert_eq!(s.depth_of_name(name), Some(d), "{name}");
        }
        assert_eq!(s.axes(), vec![0]);
        assert_eq!(s.line_depth(1), 1);
        let c1 = s.forest().node_index("c1").unwrap();
        let beta: Vec<&str> = s.beta(c1).iter().map(|&i| s.forest().name(i)).collect();
        assert_eq!(beta, ["b1", "a2"]);
        let a1 = s.forest().node_index("a1").unwrap();
        assert!(s.beta(a1).is_empty());
    }

    #[test]
    fn covering_between_lines() {
        let s = fig_tree();
        let (a, b, c) = (0, 1, 2);
        assert!(s.covers(b, a));
        assert!(s.covers(c, b));
        // Not transitive: b1 sits between C and A without being in A.
        assert!(!s.covers(c, a));
        assert!(!s.covers(a, b));
    }

    #[test]
    fn cuts_definers_tails() {
        let s = fig_tree();
        let cuts = s.cuts(0);
        assert_eq!(cuts, vec![Cut { line: 0, left_size: 1 }]);
        let k = cuts[0];
        let definers: Vec<&str> = s.definers(k).iter().map(|&i| s.forest().name(i)).collect();
        assert_eq!(definers, ["b1", "c1", "d1", "e1"]);
        let def = s.def_of(k);
        assert_eq!(def.forest().len(), 4);
        assert_eq!(def.axis(), None);
        // Two composing trees, with axes B and D.
        let comps = def.forest().components();
        assert_eq!(comps.len(), 2);
        let axes: Vec<Vec<&str>> = def.axes().iter().map(|&li| def.line_names(li)).collect();
        assert_eq!(axes, vec![vec!["b1"], vec!["d1"]]);
        // No other line has cuts; c1 is below all of the singleton line B,
        // so it is B's tail (and likewise e1 for D).
        for li in 1..s.line_count() {
            assert!(s.cuts(li).is_empty());
        }
        assert!(s.tail_nodes(0).is_empty());
        let tail_b: Vec<&str> =
            s.tail_nodes(1).iter().map(|&i| s.forest().name(i)).collect();
        assert_eq!(tail_b, ["c1"]);
        assert_eq!(s.u_plus(1).to_string(), "tau *");
        assert!(s.tail_nodes(2).is_empty());
        assert_eq!(s.u_plus(0).to_string(), "* k0.1 *");
        assert_eq!(s.u_plus(0).keys(), ["a1", "k0.1", "a2"]);
    }

    #[test]
    fn down_and_recomposition() {
        let s = fig_tree();
        // Hanging tree of B is {b1, c1} with axis {b1}.
        let down_b = s.down(1);
        assert_eq!(down_b.forest().len(), 2);
        assert_eq!(down_b.line_names(down_b.axis().unwrap()), ["b1"]);
        // The reconstruction identity, node for node.
        for li in 0..s.line_count() {
            assert_eq!(s.recompose(li).unwrap(), s.down(li), "line {li}");
        }
    }

    #[test]
    fn tail_fixture() {
        // x below the whole line {u1 < u2}: a tail, not a cut.
        let forest =
            OForest::from_pairs(["x", "u1", "u2"], &[("x", "u1"), ("u1", "u2")]).unwrap();
        let s = SOAForest::new(
            forest,
            vec![vec!["u1".into(), "u2".into()], vec!["x".into()]],
            Some(0),
        )
        .unwrap();
        assert!(s.cuts(0).is_empty());
        let tails: Vec<&str> = s.tail_nodes(0).iter().map(|&i| s.forest().name(i)).collect();
        assert_eq!(tails, ["x"]);
        assert_eq!(s.u_plus(0).to_string(), "tau * *");
        let x = s.forest().node_index("x").unwrap();
        assert_eq!(s.depth(x), 1);
        assert_eq!(s.defines_cut(0, x), None);
        assert_eq!(s.recompose(0).unwrap(), s.down(0));
    }

    #[test]
    fn validation_witnesses() {
        let forest =
            OForest::from_pairs(["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        // Non-convex line {a, c}.
        let err = SOAForest::new(
            forest.clone(),
            vec![vec!["a".into(), "c".into()], vec!["b".into()]],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, StructuringError::LineNotConvex { .. }));
        // Partition failures.
        let err = SOAForest::new(forest.clone(), vec![vec!["a".into(), "b".into()]], None)
            .unwrap_err();
        assert_eq!(err, StructuringError::NodeUncovered("c".into()));
        let err = SOAForest::new(
            forest.clone(),
            vec![vec!["a".into(), "b".into(), "c".into()], vec!["a".into()]],
            None,
        )
        .unwrap_err();
        assert_eq!(err, StructuringError::NodeTwice("a".into()));
        // Chain failure.
        let lam = OForest::from_pairs(["r", "x", "y"], &[("x", "r"), ("y", "r")]).unwrap();
        let err = SOAForest::new(
            lam.clone(),
            vec![vec!["x".into(), "y".into()], vec!["r".into()]],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, StructuringError::LineNotChain { .. }));
        // Axis must be upwards closed.
        let err = SOAForest::new(
            lam,
            vec![vec!["x".into()], vec!["y".into()], vec!["r".into()]],
            Some(0),
        )
        .unwrap_err();
        assert!(matches!(err, StructuringError::AxisNotUpwardsClosed { .. }));
    }

    #[test]
    fn substitute_standalone() {
        let h = FiniteArrangement::from_entries(vec![
            Entry { key: "p".into(), label: "*".into() },
            Entry { key: "q".into(), label: "q".into() },
            Entry { key: "r".into(), label: "*".into() },
        ]);
        let inner = OForest::from_pairs(["m1", "m2"], &[("m1", "m2")]).unwrap();
        let f =
            SOAForest::new(inner, vec![vec!["m1".into(), "m2".into()]], None).unwrap();
        let subs = BTreeMap::from([("q".to_string(), f)]);
        let out = substitute(&h, &subs).unwrap();
        assert_eq!(out.forest().len(), 4);
        assert_eq!(out.line_names(out.axis().unwrap()), ["p", "r"]);
        assert_eq!(out.forest().leq("m2", "r"), Some(true));
        assert_eq!(out.forest().leq("m2", "p"), Some(false));
        assert_eq!(out.forest().leq("p", "r"), Some(true));
        assert_eq!(out.depth_of_name("m1"), Some(1));
        // Unknown key and clashing names are rejected.
        assert!(matches!(
            substitute(&h, &BTreeMap::from([("zz".to_string(), fig_tree())])),
            Err(StructuringError::BadSubstitutionKey(_))
        ));
        let clash = BTreeMap::from([
            ("q".to_string(), fig_tree()),
            ("p".to_string(), fig_tree()),
        ]);
        assert!(matches!(
            substitute(&h, &clash),
            Err(StructuringError::SubstitutionClash(_))
        ));
    }

    #[test]
    fn greedy_structuring() {
        let s = fig_tree();
        let built = build_structuring(s.forest());
        built.validate().unwrap();
        let lines: BTreeSet<Vec<&str>> =
            (0..built.line_count()).map(|li| built.line_names(li)).collect();
        let expect: BTreeSet<Vec<&str>> =
            [vec!["a1", "a2"], vec!["c1", "b1"], vec!["e1", "d1"]].into_iter().collect();
        assert_eq!(lines, expect);
        assert_eq!(built.axis(), Some(0));
        // Greedy maximal chains leave no tails.
        for li in 0..built.line_count() {
            assert!(built.tail_nodes(li).is_empty());
        }
        // A two-component forest gets no axis.
        let two = OForest::from_pairs(["a", "b", "c"], &[("a", "b")]).unwrap();
        let bs = build_structuring(&two);
        bs.validate().unwrap();
        assert_eq!(bs.axis(), None);
        assert_eq!(bs.line_count(), 2);
    }

    #[test]
    fn json_and_dot() {
        let s = fig_tree();
        let back = SOAForest::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let dot = s.to_dot();
        assert!(dot.contains("penwidth=3"));
        assert!(dot.contains("\"b1\" -> \"a2\""));
        assert!(SOAForest::from_json("{}").is_err());
    }
}
