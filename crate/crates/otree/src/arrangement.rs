//! Arrangements: labelled linear orders, finite and regular.
//!
//! A [`FiniteArrangement`] is an explicit labelled sequence; keys give carrier
//! identity (term positions, node names), labels give the alphabet symbol. A
//! [`RegularArrangement`] is denoted by an equation system over binary `cat`,
//! nullary `om` (the empty arrangement) and nullary letters.
//!
//! Equivalence of two regular arrangements is not decided in general (the
//! full route goes through monadic second-order logic on linear orders and is
//! out of scope). [`equivalence`] gives: letter-census disagreement and exact
//! finite comparison as sound refutations, normalized-system equality as a
//! sound confirmation, and bounded-window disagreement as a heuristic
//! refutation after empty-part elimination and minimization; everything else
//! is reported unknown.

use crate::position::Position;
use crate::system::{Automaton, Count, EquationSystem, Step, SystemBuilder, SystemError};
use crate::term::{FiniteTerm, Signature};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ArrError {
    #[error("symbol `{0}` must be a nullary letter here")]
    LetterNotNullary(String),
    #[error("operator `{sym}` used with {got} arguments")]
    BadOperator { sym: String, got: usize },
    #[error("cut with left part of size {size} is not a cut of a {len}-element order (both parts must be nonempty)")]
    InvalidCut { size: usize, len: usize },
    #[error("two cuts share the same left part (size {0})")]
    DuplicateCut(usize),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// One element of a finite arrangement: a carrier key and its label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub key: String,
    pub label: String,
}

/// A finite arrangement: the element sequence is the linear order.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FiniteArrangement {
    entries: Vec<Entry>,
}

impl FiniteArrangement {
    pub fn empty() -> Self {
        FiniteArrangement::default()
    }

    pub fn from_entries(entries: Vec<Entry>) -> Self {
        FiniteArrangement { entries }
    }

    /// Labels double as keys; convenient for alphabet-only examples.
    pub fn from_labels<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        let entries = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                let label = l.into();
                Entry { key: format!("{i}"), label }
            })
            .collect();
        FiniteArrangement { entries }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.label.as_str()).collect()
    }

    pub fn keys(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.key.as_str()).collect()
    }

    /// Keeps entries whose label maps to `Some`, relabelling them.
    pub fn map_labels(&self, f: impl Fn(&str) -> Option<String>) -> FiniteArrangement {
        FiniteArrangement {
            entries: self
                .entries
                .iter()
                .filter_map(|e| {
                    f(&e.label).map(|label| Entry { key: e.key.clone(), label })
                })
                .collect(),
        }
    }
}

impl fmt::Display for FiniteArrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels().join(" "))
    }
}

/// Appends `v` after `u`. Key collisions rename the right operand's entries
/// deterministically (`k` becomes `k#2`, `k#3`, ...).
pub fn arr_concat(u: &FiniteArrangement, v: &FiniteArrangement) -> FiniteArrangement {
    let mut taken: BTreeSet<String> = u.entries.iter().map(|e| e.key.clone()).collect();
    let mut entries = u.entries.clone();
    for e in &v.entries {
        let key = fresh_key(&e.key, &mut taken);
        entries.push(Entry { key, label: e.label.clone() });
    }
    FiniteArrangement { entries }
}

pub(crate) fn fresh_key(base: &str, taken: &mut BTreeSet<String>) -> String {
    if taken.insert(base.to_string()) {
        return base.to_string();
    }
    let mut n = 2usize;
    loop {
        let cand = format!("{base}#{n}");
        if taken.insert(cand.clone()) {
            return cand;
        }
        n += 1;
    }
}

/// Label-sequence isomorphism (carrier keys are irrelevant).
pub fn finite_arr_iso(u: &FiniteArrangement, v: &FiniteArrangement) -> bool {
    u.len() == v.len()
        && u.entries
            .iter()
            .zip(&v.entries)
            .all(|(a, b)| a.label == b.label)
}

/// Value of a finite term over `cat`/`om`/letters: the letter occurrences in
/// lexicographic position order, keyed by position.
pub fn arr_value(t: &FiniteTerm) -> Result<FiniteArrangement, ArrError> {
    let mut entries = Vec::new();
    for (p, sym) in t.positions() {
        let kids = t.subterm_at(&p).expect("position from walk").children().len();
        match sym {
            "cat" if kids == 2 => {}
            "om" if kids == 0 => {}
            "cat" | "om" => {
                return Err(ArrError::BadOperator { sym: sym.to_string(), got: kids })
            }
            letter => {
                if kids != 0 {
                    return Err(ArrError::LetterNotNullary(letter.to_string()));
                }
                entries.push(Entry { key: p.to_string(), label: letter.to_string() });
            }
        }
    }
    // positions() is preorder = lexicographic, which on leaves is the
    // arrangement order.
    Ok(FiniteArrangement { entries })
}

// ---------------------------------------------------------------------------
// Labelled sets (multisets with counts in ℕ ∪ {ω}).

/// A countable multiset over an alphabet: per-symbol counts, zeros dropped.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelledSet {
    counts: BTreeMap<String, Count>,
}

impl LabelledSet {
    pub fn new() -> Self {
        LabelledSet::default()
    }

    pub fn from_counts<S: Into<String>>(pairs: impl IntoIterator<Item = (S, Count)>) -> Self {
        let mut s = LabelledSet::new();
        for (k, c) in pairs {
            s.add(&k.into(), c);
        }
        s
    }

    pub fn add(&mut self, sym: &str, c: Count) {
        if c.is_zero() {
            return;
        }
        let cur = self
            .counts
            .entry(sym.to_string())
            .or_insert(Count::Finite(0));
        *cur = cur.saturating_add(c);
    }

    pub fn add_one(&mut self, sym: &str) {
        self.add(sym, Count::Finite(1));
    }

    pub fn count(&self, sym: &str) -> Count {
        self.counts.get(sym).copied().unwrap_or(Count::Finite(0))
    }

    pub fn counts(&self) -> &BTreeMap<String, Count> {
        &self.counts
    }

    pub fn union_add(&self, other: &LabelledSet) -> LabelledSet {
        let mut out = self.clone();
        for (k, &c) in &other.counts {
            out.add(k, c);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total size (ω-absorbing).
    pub fn total(&self) -> Count {
        self.counts
            .values()
            .fold(Count::Finite(0), |a, &b| a.saturating_add(b))
    }

    /// Replaces every ω count by `b`.
    pub fn truncate_omega(&self, b: u64) -> LabelledSet {
        LabelledSet {
            counts: self
                .counts
                .iter()
                .map(|(k, &c)| {
                    (
                        k.clone(),
                        match c {
                            Count::Omega => Count::Finite(b),
                            f => f,
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn has_omega(&self) -> bool {
        self.counts.values().any(|&c| c == Count::Omega)
    }
}

impl fmt::Display for LabelledSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, c)) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}:{c}")?;
        }
        write!(f, "}}")
    }
}

/// Forgets the order of a finite arrangement.
pub fn set_of_finite(u: &FiniteArrangement) -> LabelledSet {
    let mut s = LabelledSet::new();
    for e in &u.entries {
        s.add_one(&e.label);
    }
    s
}

// ---------------------------------------------------------------------------
// Regular arrangements.

/// An arrangement denoted by a regular system over `cat`, `om` and nullary
/// letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularArrangement {
    sys: EquationSystem,
}

impl RegularArrangement {
    pub fn new(sys: EquationSystem) -> Result<Self, ArrError> {
        let aut = sys.to_automaton();
        for s in 0..aut.len() {
            let step = aut.step(s);
            match step.sym.as_str() {
                "cat" if step.args.len() == 2 => {}
                "om" if step.args.is_empty() => {}
                "cat" | "om" => {
                    return Err(ArrError::BadOperator {
                        sym: step.sym.clone(),
                        got: step.args.len(),
                    })
                }
                letter => {
                    if !step.args.is_empty() {
                        return Err(ArrError::LetterNotNullary(letter.to_string()));
                    }
                }
            }
        }
        Ok(RegularArrangement { sys })
    }

    pub fn system(&self) -> &EquationSystem {
        &self.sys
    }

    pub fn to_automaton(&self) -> Automaton {
        self.sys.to_automaton()
    }

    /// Letters occurring in reachable right-hand sides.
    pub fn letters(&self) -> BTreeSet<String> {
        let aut = self.sys.to_automaton().prune();
        (0..aut.len())
            .map(|s| aut.step(s).sym.clone())
            .filter(|s| s != "cat" && s != "om")
            .collect()
    }

    /// Per-letter census via the occurrence languages.
    pub fn set_of(&self) -> LabelledSet {
        let aut = self.sys.to_automaton().prune();
        let mut s = LabelledSet::new();
        for letter in self.letters() {
            s.add(&letter, aut.occurrences_language(&letter).census());
        }
        s
    }

    /// The sub-arrangement on letter positions of Dewey length ≤ `b`, in
    /// inorder; keys are position strings.
    pub fn bounded_window(&self, b: usize) -> FiniteArrangement {
        let aut = self.sys.to_automaton();
        let mut lettered: Vec<(Position, String)> = Vec::new();
        for w in aut.domain_language().enumerate(b) {
            let sym = aut.label_at(&w).expect("enumerated in-domain");
            if sym != "cat" && sym != "om" {
                lettered.push((w, sym.to_string()));
            }
        }
        lettered.sort_by(|a, b| a.0.in_cmp(&b.0));
        FiniteArrangement {
            entries: lettered
                .into_iter()
                .map(|(p, label)| Entry { key: p.to_string(), label })
                .collect(),
        }
    }

    /// The exact value when it is finite (every letter census finite); the
    /// window at the longest letter position is then complete.
    pub fn materialize_exact(&self) -> Option<FiniteArrangement> {
        let aut = self.sys.to_automaton().prune();
        let mut bound = 0usize;
        for letter in self.letters() {
            let dfa = aut.occurrences_language(&letter);
            match dfa.census() {
                Count::Omega => return None,
                Count::Finite(_) => {
                    bound = bound.max(dfa.max_word_len().unwrap_or(0));
                }
            }
        }
        Some(self.bounded_window(bound))
    }

    /// Relabels letters; letters absent from `map` are erased (become `om`).
    pub fn erase_relabel(&self, map: &BTreeMap<String, String>) -> RegularArrangement {
        let aut = self.sys.to_automaton();
        let mut letters: BTreeSet<String> = map.values().cloned().collect();
        letters.extend(self.letters());
        let sig = Signature::arrangement(letters);
        let mut b = SystemBuilder::new(sig);
        for s in 0..aut.len() {
            let step = aut.step(s);
            let name = aut.state_name(s).to_string();
            match step.sym.as_str() {
                "cat" => {
                    b.rule(
                        name,
                        "cat",
                        step.args
                            .iter()
                            .map(|&a| aut.state_name(a).to_string())
                            .collect::<Vec<_>>(),
                    );
                }
                "om" => {
                    b.rule(name, "om", Vec::<String>::new());
                }
                letter => match map.get(letter) {
                    Some(new) => {
                        b.rule(name, new.clone(), Vec::<String>::new());
                    }
                    None => {
                        b.rule(name, "om", Vec::<String>::new());
                    }
                },
            }
        }
        let sys = b
            .finish(aut.state_name(aut.initial()))
            .expect("relabelling preserves well-formedness");
        RegularArrangement { sys }
    }

    /// Canonical automaton after empty-part elimination and minimization.
    /// Two regular arrangements with identical normalized structure denote
    /// the same arrangement.
    pub fn normalized(&self) -> Automaton {
        let aut = self.sys.to_automaton().prune();
        // A state is empty when no letter is reachable from it.
        let n = aut.len();
        let mut has_letter = vec![false; n];
        loop {
            let mut progress = false;
            for s in 0..n {
                if has_letter[s] {
                    continue;
                }
                let step = aut.step(s);
                let now = (step.sym != "cat" && step.sym != "om")
                    || step.args.iter().any(|&t| has_letter[t]);
                if now {
                    has_letter[s] = true;
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        // follow(s): the first non-degenerate rhs below s, skipping cat nodes
        // with an empty side. Cycles of degenerate cats are empty, so this
        // terminates on non-empty states.
        fn follow(aut: &Automaton, has_letter: &[bool], s: usize) -> Step {
            let step = aut.step(s);
            if step.sym == "cat" {
                let (a, b) = (step.args[0], step.args[1]);
                match (has_letter[a], has_letter[b]) {
                    (true, true) => step.clone(),
                    (true, false) => follow(aut, has_letter, a),
                    (false, true) => follow(aut, has_letter, b),
                    (false, false) => unreachable!("empty state queried"),
                }
            } else {
                step.clone()
            }
        }
        let mut b = SystemBuilder::new(self.sys.sig().clone());
        for s in 0..n {
            let name = aut.state_name(s).to_string();
            if !has_letter[s] {
                b.rule(name, "om", Vec::<String>::new());
                continue;
            }
            let step = follow(&aut, &has_letter, s);
            b.rule(
                name,
                step.sym,
                step.args
                    .iter()
                    .map(|&t| aut.state_name(t).to_string())
                    .collect::<Vec<_>>(),
            );
        }
        b.finish(aut.state_name(aut.initial()))
            .expect("rewriting preserves well-formedness")
            .to_automaton()
            .normalize()
    }
}

impl fmt::Display for RegularArrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.sys, f)
    }
}

/// Verdict of the partial equivalence check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Iso,
    NonIso,
    Unknown,
}

/// Partial equivalence of regular arrangements; see the module docs for
/// which verdicts are sound and which are heuristic.
pub fn equivalence(u: &RegularArrangement, v: &RegularArrangement, window_b: usize) -> Equivalence {
    if u.set_of() != v.set_of() {
        return Equivalence::NonIso;
    }
    if let (Some(fu), Some(fv)) = (u.materialize_exact(), v.materialize_exact()) {
        return if finite_arr_iso(&fu, &fv) {
            Equivalence::Iso
        } else {
            Equivalence::NonIso
        };
    }
    if u.normalized().same_structure(&v.normalized()) {
        return Equivalence::Iso;
    }
    if !finite_arr_iso(&u.bounded_window(window_b), &v.bounded_window(window_b)) {
        return Equivalence::NonIso;
    }
    Equivalence::Unknown
}

// ---------------------------------------------------------------------------
// Inorder flattening: every position becomes a letter.

/// Letter name for a term symbol in the inorder flattening; the operator
/// names of the output system are shadowed with a `#l` suffix.
pub fn inorder_letter(sym: &str) -> String {
    if sym == "cat" || sym == "om" {
        format!("{sym}#l")
    } else {
        sym.to_string()
    }
}

/// Inorder traversal of a finite term as an arrangement over all positions.
pub fn inorder_arrangement(t: &FiniteTerm) -> FiniteArrangement {
    let mut pos: Vec<(Position, String)> = t
        .positions()
        .into_iter()
        .map(|(p, s)| (p, inorder_letter(s)))
        .collect();
    pos.sort_by(|a, b| a.0.in_cmp(&b.0));
    FiniteArrangement {
        entries: pos
            .into_iter()
            .map(|(p, label)| Entry { key: p.to_string(), label })
            .collect(),
    }
}

/// Regular-term inorder flattening: the arrangement of all positions of the
/// solution, ordered by inorder, each labelled by its symbol.
///
/// A binary rhs `f(u,v)` becomes `(û • f) • v̂`; unary `f(u)` becomes
/// `û • f`; constants become letters.
pub fn term_to_arrangement(sys: &EquationSystem) -> Result<RegularArrangement, ArrError> {
    let aut = sys.to_automaton().prune();
    let mut letters: BTreeSet<String> = BTreeSet::new();
    for s in 0..aut.len() {
        letters.insert(inorder_letter(&aut.step(s).sym));
    }
    let sig = Signature::arrangement(letters.clone());
    let mut b = SystemBuilder::new(sig);
    let h = |s: usize| format!("h_{}", aut.state_name(s));
    for s in 0..aut.len() {
        let step = aut.step(s);
        let letter_unknown = format!("lt_{}", inorder_letter(&step.sym));
        match step.args.len() {
            0 => {
                b.rule(h(s), inorder_letter(&step.sym), Vec::<String>::new());
            }
            1 => {
                b.rule(h(s), "cat", [h(step.args[0]), letter_unknown]);
            }
            2 => {
                let aux = format!("hx_{}", aut.state_name(s));
                b.rule(h(s), "cat", [aux.clone(), h(step.args[1])]);
                b.rule(aux, "cat", [h(step.args[0]), letter_unknown]);
            }
            _ => unreachable!("arity above 2"),
        }
    }
    for letter in &letters {
        b.rule(format!("lt_{letter}"), letter.clone(), Vec::<String>::new());
    }
    let sys = b.finish(&h(aut.initial()))?;
    RegularArrangement::new(sys)
}

// ---------------------------------------------------------------------------
// Cuts of finite linear orders.

/// A cut of a finite arrangement, keyed by its left-part size (the cut sits
/// between positions `left_size - 1` and `left_size`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCut {
    pub left_size: usize,
    pub label: String,
}

impl LinearCut {
    pub fn left<'a>(&self, u: &'a FiniteArrangement) -> &'a [Entry] {
        &u.entries[..self.left_size]
    }

    pub fn right<'a>(&self, u: &'a FiniteArrangement) -> &'a [Entry] {
        &u.entries[self.left_size..]
    }
}

/// Inserts cut tags into their places: an element precedes a cut iff it lies
/// in the cut's left part; cuts are ordered by left-part inclusion.
pub fn cuts_extend(
    u: &FiniteArrangement,
    cuts: &[LinearCut],
) -> Result<FiniteArrangement, ArrError> {
    let mut seen = BTreeSet::new();
    for c in cuts {
        if c.left_size == 0 || c.left_size >= u.len() {
            return Err(ArrError::InvalidCut { size: c.left_size, len: u.len() });
        }
        if !seen.insert(c.left_size) {
            return Err(ArrError::DuplicateCut(c.left_size));
        }
    }
    let mut sorted: Vec<&LinearCut> = cuts.iter().collect();
    sorted.sort_by_key(|c| c.left_size);
    let mut entries = Vec::new();
    let mut ci = 0usize;
    for (i, e) in u.entries.iter().enumerate() {
        while ci < sorted.len() && sorted[ci].left_size == i {
            entries.push(Entry {
                key: format!("cut:{}", sorted[ci].left_size),
                label: sorted[ci].label.clone(),
            });
            ci += 1;
        }
        entries.push(e.clone());
    }
    // left_size < len, so no cut can trail the last element.
    Ok(FiniteArrangement { entries })
}
