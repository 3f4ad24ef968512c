//! Description schemes: finite labelling data that pins down a structured
//! order-theoretic tree with axis up to isomorphism.
//!
//! A scheme carries line labels `D`, cut labels `Q_cut`, tail labels
//! `Q_tail`, a distinguished axis label, one extended arrangement `w_d` per
//! line label (the line with its cut and tail symbols inserted), and one
//! multiset `m_q` per cut or tail label (the line labels of the depth+1
//! lines hanging there, with possibly infinite multiplicities).
//!
//! The module provides:
//! - [`describes`] / [`find_labelling`]: search for a good labelling of a
//!   finite structured tree, with [`check_labelling`] as an independent
//!   direct verifier of the labelling conditions;
//! - [`unfold_scheme`]: bounded unfolding of a scheme back into a finite
//!   structured tree, reporting whether anything was truncated;
//! - [`extract_scheme`]: the identity scheme of a finite structured tree
//!   (every line its own label);
//! - [`extract_scheme_regular`]: scheme extraction from a regular system
//!   over `{cat, fg, om, star}`, with regular axis words and path-counted
//!   multiplicities (`omega` when a boundary repeats along a cycle);
//! - [`scheme_equiv`]: a sound three-valued comparison (`Iso` / `NonIso` /
//!   `Unknown`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::arrangement::{
    equivalence, finite_arr_iso, ArrError, Equivalence, FiniteArrangement, LabelledSet,
    RegularArrangement,
};
use crate::structuring::{Cut, SOAForest};
use crate::system::{parse_system, Automaton, Count, EquationSystem, SystemBuilder, SystemError};
use crate::term::{FiniteTerm, Signature};
use crate::value::{soa_iso, val_direct, ValueError};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("axis label `{0}` has no axis word")]
    AxisLabelUnknown(String),
    #[error("label `{0}` is used in more than one role")]
    LabelClash(String),
    #[error("multiplicity key `{0}` is not a cut or tail label")]
    BadMultiplicityKey(String),
    #[error("missing multiplicity for label `{0}`")]
    MissingMultiplicity(String),
    #[error("multiplicity of `{q}` mentions unknown line label `{d}`")]
    UnknownLineLabel { q: String, d: String },
    #[error("axis word of `{d}`: {reason}")]
    BadWord { d: String, reason: String },
    #[error("the structure has no axis line")]
    NoAxis,
    #[error("expected a single structured tree")]
    NotATree,
    #[error("symbol `{0}` is not supported in systems for scheme extraction")]
    UnsupportedSymbol(String),
    #[error("the system denotes a value with an empty axis")]
    EmptyAxis,
    #[error("unfolding exceeded {0} nodes")]
    UnfoldTooLarge(usize),
    #[error("bad scheme json: {0}")]
    Json(String),
    #[error(transparent)]
    Value(#[from] ValueError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Arr(#[from] ArrError),
}

// ---------------------------------------------------------------------------
// Axis words.

/// An axis word: the arrangement of a line over `*` (one node) and cut/tail
/// symbols, either given literally or as a regular system.
#[derive(Clone, Debug)]
pub enum WForm {
    Finite(FiniteArrangement),
    Regular(RegularArrangement),
}

impl WForm {
    pub fn materialize_exact(&self) -> Option<FiniteArrangement> {
        match self {
            WForm::Finite(fa) => Some(fa.clone()),
            WForm::Regular(ra) => ra.materialize_exact(),
        }
    }

    /// A finite view bounded by `b`; the flag reports whether it is exact.
    pub fn window(&self, b: usize) -> (FiniteArrangement, bool) {
        match self {
            WForm::Finite(fa) => (fa.clone(), true),
            WForm::Regular(ra) => match ra.materialize_exact() {
                Some(fa) => (fa, true),
                None => (ra.bounded_window(b), false),
            },
        }
    }

    pub fn set_of(&self) -> LabelledSet {
        match self {
            WForm::Finite(fa) => crate::arrangement::set_of_finite(fa),
            WForm::Regular(ra) => ra.set_of(),
        }
    }

    pub fn letters(&self) -> BTreeSet<String> {
        match self {
            WForm::Finite(fa) => fa.labels().into_iter().map(str::to_string).collect(),
            WForm::Regular(ra) => ra.letters(),
        }
    }
}

// ---------------------------------------------------------------------------
// Schemes.

/// A description scheme. Line labels are the keys of `w`; `m` has exactly
/// the cut and tail labels as keys.
#[derive(Clone, Debug)]
pub struct DescriptionScheme {
    d_labels: BTreeSet<String>,
    q_cut: BTreeSet<String>,
    q_tail: BTreeSet<String>,
    d_ax: String,
    m: BTreeMap<String, LabelledSet>,
    w: BTreeMap<String, WForm>,
}

impl DescriptionScheme {
    pub fn new(
        d_ax: &str,
        q_cut: BTreeSet<String>,
        q_tail: BTreeSet<String>,
        m: BTreeMap<String, LabelledSet>,
        w: BTreeMap<String, WForm>,
    ) -> Result<DescriptionScheme, SchemeError> {
        let d_labels: BTreeSet<String> = w.keys().cloned().collect();
        if !d_labels.contains(d_ax) {
            return Err(SchemeError::AxisLabelUnknown(d_ax.to_string()));
        }
        if let Some(x) = q_cut.intersection(&q_tail).next() {
            return Err(SchemeError::LabelClash(x.clone()));
        }
        for q in q_cut.iter().chain(&q_tail) {
            if d_labels.contains(q) || q == "*" {
                return Err(SchemeError::LabelClash(q.clone()));
            }
            if !m.contains_key(q) {
                return Err(SchemeError::MissingMultiplicity(q.clone()));
            }
        }
        for (q, ls) in &m {
            if !q_cut.contains(q) && !q_tail.contains(q) {
                return Err(SchemeError::BadMultiplicityKey(q.clone()));
            }
            for d in ls.counts().keys() {
                if !d_labels.contains(d) {
                    return Err(SchemeError::UnknownLineLabel { q: q.clone(), d: d.clone() });
                }
            }
        }
        for (d, wf) in &w {
            match wf {
                WForm::Finite(fa) => {
                    let labels: Vec<&str> = fa.labels();
                    check_word(&labels, &q_cut, &q_tail)
                        .map_err(|reason| SchemeError::BadWord { d: d.clone(), reason })?;
                }
                WForm::Regular(ra) => {
                    for l in ra.letters() {
                        if l != "*" && !q_cut.contains(&l) && !q_tail.contains(&l) {
                            return Err(SchemeError::BadWord {
                                d: d.clone(),
                                reason: format!("unknown letter `{l}`"),
                            });
                        }
                    }
                }
            }
        }
        Ok(DescriptionScheme { d_labels, q_cut, q_tail, d_ax: d_ax.to_string(), m, w })
    }

    pub fn d_labels(&self) -> &BTreeSet<String> {
        &self.d_labels
    }

    pub fn q_cut(&self) -> &BTreeSet<String> {
        &self.q_cut
    }

    pub fn q_tail(&self) -> &BTreeSet<String> {
        &self.q_tail
    }

    pub fn d_ax(&self) -> &str {
        &self.d_ax
    }

    pub fn multiplicity(&self, q: &str) -> Option<&LabelledSet> {
        self.m.get(q)
    }

    pub fn word(&self, d: &str) -> Option<&WForm> {
        self.w.get(d)
    }

    /// The same scheme with every infinite multiplicity capped at `b`.
    pub fn truncate_omega(&self, b: u64) -> DescriptionScheme {
        let mut out = self.clone();
        out.m = self.m.iter().map(|(q, ls)| (q.clone(), ls.truncate_omega(b))).collect();
        out
    }

    pub fn to_json(&self) -> String {
        let w: BTreeMap<&String, serde_json::Value> = self
            .w
            .iter()
            .map(|(d, wf)| {
                let v = match wf {
                    WForm::Finite(fa) => json!({ "finite": fa.labels() }),
                    WForm::Regular(ra) => json!({ "regular": ra.system().to_string() }),
                };
                (d, v)
            })
            .collect();
        serde_json::to_string_pretty(&json!({
            "d_ax": self.d_ax,
            "q_cut": self.q_cut,
            "q_tail": self.q_tail,
            "m": self.m,
            "w": w,
        }))
        .expect("scheme serializes")
    }

    pub fn from_json(text: &str) -> Result<DescriptionScheme, SchemeError> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SchemeError::Json(e.to_string()))?;
        let field = |k: &str| v.get(k).cloned().ok_or_else(|| SchemeError::Json(format!("missing `{k}`")));
        let d_ax: String = serde_json::from_value(field("d_ax")?)
            .map_err(|e| SchemeError::Json(e.to_string()))?;
        let q_cut: BTreeSet<String> = serde_json::from_value(field("q_cut")?)
            .map_err(|e| SchemeError::Json(e.to_string()))?;
        let q_tail: BTreeSet<String> = serde_json::from_value(field("q_tail")?)
            .map_err(|e| SchemeError::Json(e.to_string()))?;
        let m: BTreeMap<String, LabelledSet> = serde_json::from_value(field("m")?)
            .map_err(|e| SchemeError::Json(e.to_string()))?;
        let mut letters: BTreeSet<String> = q_cut.union(&q_tail).cloned().collect();
        letters.insert("*".into());
        let sig = Signature::arrangement(letters);
        let raw_w: BTreeMap<String, serde_json::Value> = serde_json::from_value(field("w")?)
            .map_err(|e| SchemeError::Json(e.to_string()))?;
        let mut w = BTreeMap::new();
        for (d, spec) in raw_w {
            let wf = if let Some(labels) = spec.get("finite") {
                let labels: Vec<String> = serde_json::from_value(labels.clone())
                    .map_err(|e| SchemeError::Json(e.to_string()))?;
                WForm::Finite(FiniteArrangement::from_labels(labels))
            } else if let Some(textv) = spec.get("regular") {
                let text = textv
                    .as_str()
                    .ok_or_else(|| SchemeError::Json("`regular` must be a string".into()))?;
                WForm::Regular(RegularArrangement::new(parse_system(text, &sig)?)?)
            } else {
                return Err(SchemeError::Json(format!("word of `{d}` needs `finite` or `regular`")));
            };
            w.insert(d, wf);
        }
        DescriptionScheme::new(&d_ax, q_cut, q_tail, m, w)
    }
}

impl fmt::Display for DescriptionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axis {}", self.d_ax)?;
        for (d, wf) in &self.w {
            match wf {
                WForm::Finite(fa) => writeln!(f, "{d}: {fa}")?,
                WForm::Regular(ra) => match ra.materialize_exact() {
                    Some(fa) => writeln!(f, "{d}: {fa}")?,
                    None => writeln!(f, "{d}: regular over {:?}", ra.letters())?,
                },
            }
        }
        for (q, ls) in &self.m {
            writeln!(f, "{q}: {ls}")?;
        }
        Ok(())
    }
}

/// A word is one optional tail symbol first, then nodes with cut symbols
/// strictly between nodes.
fn check_word(
    labels: &[&str],
    q_cut: &BTreeSet<String>,
    q_tail: &BTreeSet<String>,
) -> Result<(), String> {
    let mut stars_since = 0usize;
    for (i, l) in labels.iter().enumerate() {
        if *l == "*" {
            stars_since += 1;
        } else if q_tail.contains(*l) {
            if i != 0 {
                return Err(format!("tail symbol `{l}` is not first"));
            }
        } else if q_cut.contains(*l) {
            if stars_since == 0 {
                return Err(format!("cut symbol `{l}` has no node before it"));
            }
            stars_since = 0;
        } else {
            return Err(format!("unknown symbol `{l}`"));
        }
    }
    if let Some(last) = labels.last() {
        if q_cut.contains(*last) {
            return Err(format!("cut symbol `{last}` has no node after it"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Labellings.

/// A candidate good labelling: line labels per line, cut labels per cut key,
/// tail labels per line with nonempty tail.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoodLabelling {
    pub r: BTreeMap<usize, String>,
    pub s_cut: BTreeMap<String, String>,
    pub s_tail: BTreeMap<usize, String>,
}

/// The depth+1 lines of the definers of a cut.
pub fn cut_axes(j: &SOAForest, cut: Cut) -> Vec<usize> {
    let target = j.line_depth(cut.line) + 1;
    let mut lines = BTreeSet::new();
    for n in j.definers(cut) {
        let li = j.line_of(n);
        if j.line_depth(li) == target {
            lines.insert(li);
        }
    }
    lines.into_iter().collect()
}

/// The depth+1 lines of the tail of a line.
pub fn tail_axes(j: &SOAForest, li: usize) -> Vec<usize> {
    let target = j.line_depth(li) + 1;
    let mut lines = BTreeSet::new();
    for n in j.tail_nodes(li) {
        let l2 = j.line_of(n);
        if j.line_depth(l2) == target {
            lines.insert(l2);
        }
    }
    lines.into_iter().collect()
}

fn axes_census(lab: &GoodLabelling, axes: &[usize]) -> Option<LabelledSet> {
    let mut out = LabelledSet::new();
    for li in axes {
        out.add_one(lab.r.get(li)?);
    }
    Some(out)
}

fn decrement(set: &LabelledSet, label: &str) -> LabelledSet {
    let mut pairs: Vec<(String, Count)> = Vec::new();
    for (l, &c) in set.counts() {
        if l == label {
            match c {
                Count::Omega => pairs.push((l.clone(), Count::Omega)),
                Count::Finite(1) => {}
                Count::Finite(n) => pairs.push((l.clone(), Count::Finite(n - 1))),
            }
        } else {
            pairs.push((l.clone(), c));
        }
    }
    LabelledSet::from_counts(pairs)
}

/// Directly verifies the labelling conditions: the axis carries the axis
/// label, each line matches the word of its label slot by slot, and each
/// cut or tail hangs exactly the multiset of lines its label prescribes.
pub fn check_labelling(
    j: &SOAForest,
    sch: &DescriptionScheme,
    lab: &GoodLabelling,
) -> Result<(), String> {
    let axis = j.axis().ok_or("the structure has no axis")?;
    if !j.forest().is_otree() {
        return Err("the structure is not a single tree".into());
    }
    match lab.r.get(&axis) {
        Some(d) if *d == sch.d_ax => {}
        Some(d) => return Err(format!("axis labelled `{d}`, scheme wants `{}`", sch.d_ax)),
        None => return Err("axis is unlabelled".into()),
    }
    for li in 0..j.line_count() {
        let d = lab.r.get(&li).ok_or_else(|| format!("line {li} is unlabelled"))?;
        let wf = sch.w.get(d).ok_or_else(|| format!("no word for label `{d}`"))?;
        let exact = wf
            .materialize_exact()
            .ok_or_else(|| format!("word of `{d}` is infinite, line {li} is finite"))?;
        let up = j.u_plus(li);
        if exact.len() != up.len() {
            return Err(format!(
                "line {li}: word of `{d}` has {} slots, the line has {}",
                exact.len(),
                up.len()
            ));
        }
        for (e, wl) in up.entries().iter().zip(exact.labels()) {
            let want: &str = match e.label.as_str() {
                "*" => "*",
                "tau" => lab
                    .s_tail
                    .get(&li)
                    .ok_or_else(|| format!("tail of line {li} is unlabelled"))?,
                key => lab
                    .s_cut
                    .get(key)
                    .ok_or_else(|| format!("cut {key} is unlabelled"))?,
            };
            if want != wl {
                return Err(format!("line {li}: slot `{}` labelled `{wl}`, expected `{want}`", e.key));
            }
        }
    }
    for cut in j.all_cuts() {
        let q = lab
            .s_cut
            .get(&cut.key())
            .ok_or_else(|| format!("cut {} is unlabelled", cut.key()))?;
        if !sch.q_cut.contains(q) {
            return Err(format!("`{q}` is not a cut label"));
        }
        let axes = cut_axes(j, cut);
        let got = axes_census(lab, &axes).ok_or("a hanging line is unlabelled")?;
        let want = sch.m.get(q).ok_or_else(|| format!("no multiplicity for `{q}`"))?;
        if got.counts() != want.counts() {
            return Err(format!("cut {}: hangs {got}, `{q}` prescribes {want}", cut.key()));
        }
    }
    for li in 0..j.line_count() {
        if j.tail_nodes(li).is_empty() {
            continue;
        }
        let q = lab
            .s_tail
            .get(&li)
            .ok_or_else(|| format!("tail of line {li} is unlabelled"))?;
        if !sch.q_tail.contains(q) {
            return Err(format!("`{q}` is not a tail label"));
        }
        let axes = tail_axes(j, li);
        let got = axes_census(lab, &axes).ok_or("a hanging line is unlabelled")?;
        let want = sch.m.get(q).ok_or_else(|| format!("no multiplicity for `{q}`"))?;
        if got.counts() != want.counts() {
            return Err(format!("tail of line {li}: hangs {got}, `{q}` prescribes {want}"));
        }
    }
    Ok(())
}

fn solve_line(
    j: &SOAForest,
    sch: &DescriptionScheme,
    li: usize,
    d: &str,
    lab: &mut GoodLabelling,
) -> bool {
    if let Some(prev) = lab.r.get(&li) {
        return prev == d;
    }
    if !sch.d_labels.contains(d) {
        return false;
    }
    lab.r.insert(li, d.to_string());
    let Some(exact) = sch.w.get(d).and_then(|wf| wf.materialize_exact()) else {
        return false;
    };
    let up = j.u_plus(li);
    if exact.len() != up.len() {
        return false;
    }
    let cuts = j.cuts(li);
    let mut ci = 0usize;
    let mut cut_binds: Vec<(Cut, String)> = Vec::new();
    let mut tail_bind: Option<String> = None;
    for (e, wl) in up.entries().iter().zip(exact.labels()) {
        match e.label.as_str() {
            "*" => {
                if wl != "*" {
                    return false;
                }
            }
            "tau" => {
                if !sch.q_tail.contains(wl) {
                    return false;
                }
                tail_bind = Some(wl.to_string());
            }
            _ => {
                if !sch.q_cut.contains(wl) {
                    return false;
                }
                cut_binds.push((cuts[ci], wl.to_string()));
                ci += 1;
            }
        }
    }
    for (cut, q) in cut_binds {
        lab.s_cut.insert(cut.key(), q.clone());
        let axes = cut_axes(j, cut);
        let remaining = sch.m[&q].clone();
        if !match_axes(j, sch, &axes, remaining, lab) {
            return false;
        }
    }
    if let Some(q) = tail_bind {
        lab.s_tail.insert(li, q.clone());
        let axes = tail_axes(j, li);
        let remaining = sch.m[&q].clone();
        if !match_axes(j, sch, &axes, remaining, lab) {
            return false;
        }
    }
    true
}

fn match_axes(
    j: &SOAForest,
    sch: &DescriptionScheme,
    axes: &[usize],
    remaining: LabelledSet,
    lab: &mut GoodLabelling,
) -> bool {
    let Some((&first, rest)) = axes.split_first() else {
        return remaining.is_empty();
    };
    let candidates: Vec<String> = remaining.counts().keys().cloned().collect();
    for d in candidates {
        let mut trial = lab.clone();
        if solve_line(j, sch, first, &d, &mut trial) {
            let rem = decrement(&remaining, &d);
            if match_axes(j, sch, rest, rem, &mut trial) {
                *lab = trial;
                return true;
            }
        }
    }
    false
}

/// Searches for a good labelling, propagating forced slot bindings down
/// from the axis and backtracking over which hanging line gets which label.
pub fn find_labelling(j: &SOAForest, sch: &DescriptionScheme) -> Option<GoodLabelling> {
    let axis = j.axis()?;
    if !j.forest().is_otree() {
        return None;
    }
    let mut lab = GoodLabelling::default();
    let d_ax = sch.d_ax.clone();
    if solve_line(j, sch, axis, &d_ax, &mut lab) {
        debug_assert_eq!(check_labelling(j, sch, &lab), Ok(()));
        Some(lab)
    } else {
        None
    }
}

/// Whether the scheme describes the finite structured tree.
pub fn describes(j: &SOAForest, sch: &DescriptionScheme) -> bool {
    find_labelling(j, sch).is_some()
}

// ---------------------------------------------------------------------------
// Unfolding.

/// Guards unfolding against combinatorial blowup.
pub const UNFOLD_NODE_CAP: usize = 3000;

/// A bounded unfolding. `complete` is false when anything was dropped: an
/// infinite word windowed, an `omega` multiplicity capped, or a hanging
/// line omitted by the depth bound.
#[derive(Clone, Debug)]
pub struct Unfolding {
    pub soa: SOAForest,
    pub complete: bool,
}

/// Keeps window labels well formed: a tail symbol only first, cut symbols
/// only with a node on both sides. Dropped symbols mark the result
/// incomplete (windows of infinite words can strand cut symbols).
fn sanitize_slots(
    labels: Vec<String>,
    sch: &DescriptionScheme,
    dropped: &mut bool,
) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut stars_since = 0usize;
    for (i, l) in labels.into_iter().enumerate() {
        if l == "*" {
            out.push(l);
            stars_since += 1;
        } else if sch.q_tail.contains(&l) {
            if i == 0 {
                out.push(l);
            } else {
                *dropped = true;
            }
        } else if sch.q_cut.contains(&l) {
            if stars_since >= 1 {
                out.push(l);
                stars_since = 0;
            } else {
                *dropped = true;
            }
        } else {
            *dropped = true;
        }
    }
    while out.last().map(|l| sch.q_cut.contains(l)).unwrap_or(false) {
        out.pop();
        *dropped = true;
    }
    out
}

fn fold_cat(items: Vec<FiniteTerm>) -> Option<FiniteTerm> {
    let mut it = items.into_iter().rev();
    let last = it.next()?;
    Some(it.fold(last, |acc, x| FiniteTerm::new("cat", vec![x, acc])))
}

#[allow(clippy::too_many_arguments)]
fn build_line(
    sch: &DescriptionScheme,
    d: &str,
    depth: usize,
    k: usize,
    b: usize,
    prefix: &str,
    stars: &mut usize,
    complete: &mut bool,
) -> Result<Option<FiniteTerm>, SchemeError> {
    let wf = sch.w.get(d).expect("validated scheme");
    let (win, exact) = wf.window(b);
    if !exact {
        *complete = false;
    }
    let mut dropped = false;
    let labels: Vec<String> = win.labels().into_iter().map(str::to_string).collect();
    let slots = sanitize_slots(labels, sch, &mut dropped);
    if dropped {
        *complete = false;
    }
    let mut items: Vec<FiniteTerm> = Vec::new();
    let mut child_ord = 0usize;
    for (si, l) in slots.iter().enumerate() {
        if l == "*" {
            *stars += 1;
            if *stars > UNFOLD_NODE_CAP {
                return Err(SchemeError::UnfoldTooLarge(UNFOLD_NODE_CAP));
            }
            items.push(FiniteTerm::leaf(format!("'{prefix}{si}")));
        } else if depth + 1 < k {
            let mq = &sch.m[l];
            for (dl, &c) in mq.counts() {
                let n = match c {
                    Count::Finite(n) => n,
                    Count::Omega => {
                        *complete = false;
                        b as u64
                    }
                };
                for _ in 0..n {
                    let cp = format!("{prefix}{si}.{child_ord}_");
                    child_ord += 1;
                    if let Some(t) = build_line(sch, dl, depth + 1, k, b, &cp, stars, complete)? {
                        items.push(FiniteTerm::new("fg", vec![t]));
                    }
                }
            }
        } else if !sch.m[l].is_empty() {
            *complete = false;
        }
    }
    Ok(fold_cat(items))
}

/// Unfolds a scheme into the finite structured tree it describes, bounded
/// by line depth `k` (lines of depth < `k` are produced) and by `b` (window
/// bound on infinite axis words, cap on `omega` multiplicities).
pub fn unfold_scheme(
    sch: &DescriptionScheme,
    k: usize,
    b: usize,
) -> Result<Unfolding, SchemeError> {
    let mut stars = 0usize;
    let mut complete = true;
    let d_ax = sch.d_ax.clone();
    let term = build_line(sch, &d_ax, 0, k, b, "", &mut stars, &mut complete)?
        .unwrap_or_else(|| FiniteTerm::leaf("om"));
    let soa = val_direct(&term)?;
    Ok(Unfolding { soa, complete })
}

// ---------------------------------------------------------------------------
// Extraction from a finite structured tree.

/// The identity scheme of a finite structured tree: one line label per
/// line, one cut or tail label per cut or tail, words read off the lines.
/// The returned labelling is good by construction.
pub fn extract_scheme(
    j: &SOAForest,
) -> Result<(DescriptionScheme, GoodLabelling), SchemeError> {
    if j.axis().is_none() {
        return Err(SchemeError::NoAxis);
    }
    if !j.forest().is_otree() {
        return Err(SchemeError::NotATree);
    }
    let dl = |li: usize| format!("d@{li}");
    let mut q_cut = BTreeSet::new();
    let mut q_tail = BTreeSet::new();
    let mut m = BTreeMap::new();
    let mut w = BTreeMap::new();
    let mut lab = GoodLabelling::default();
    for li in 0..j.line_count() {
        lab.r.insert(li, dl(li));
        let labels: Vec<String> = j
            .u_plus(li)
            .entries()
            .iter()
            .map(|e| match e.label.as_str() {
                "*" => "*".to_string(),
                "tau" => format!("t@{li}"),
                key => format!("k@{key}"),
            })
            .collect();
        w.insert(dl(li), WForm::Finite(FiniteArrangement::from_labels(labels)));
        for cut in j.cuts(li) {
            let q = format!("k@{}", cut.key());
            let mut ls = LabelledSet::new();
            for ax in cut_axes(j, cut) {
                ls.add_one(&dl(ax));
            }
            lab.s_cut.insert(cut.key(), q.clone());
            q_cut.insert(q.clone());
            m.insert(q, ls);
        }
        if !j.tail_nodes(li).is_empty() {
            let q = format!("t@{li}");
            let mut ls = LabelledSet::new();
            for ax in tail_axes(j, li) {
                ls.add_one(&dl(ax));
            }
            lab.s_tail.insert(li, q.clone());
            q_tail.insert(q.clone());
            m.insert(q, ls);
        }
    }
    let axis = j.axis().expect("checked");
    let sch = DescriptionScheme::new(&dl(axis), q_cut, q_tail, m, w)?;
    debug_assert_eq!(check_labelling(j, &sch, &lab), Ok(()));
    Ok((sch, lab))
}

// ---------------------------------------------------------------------------
// Extraction from a regular system.

/// Gap walk modes over automaton states: along the right edge of a region
/// part, along the left edge, or through a star-free part in full.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Mode {
    Right,
    Left,
    All,
}

fn walk_succ(
    aut: &Automaton,
    rs: &[bool],
    mode: Mode,
    s: usize,
) -> (Vec<(Mode, usize)>, Option<usize>) {
    let step = aut.step(s);
    match step.sym.as_str() {
        "fg" => {
            let c = step.args[0];
            if rs[c] {
                (Vec::new(), Some(c))
            } else {
                (Vec::new(), None)
            }
        }
        "cat" => {
            let (a, b) = (step.args[0], step.args[1]);
            let succs = match mode {
                Mode::All => vec![(Mode::All, a), (Mode::All, b)],
                Mode::Right => {
                    if rs[b] {
                        vec![(Mode::Right, b)]
                    } else {
                        vec![(Mode::All, b), (Mode::Right, a)]
                    }
                }
                Mode::Left => {
                    if rs[a] {
                        vec![(Mode::Left, a)]
                    } else {
                        vec![(Mode::All, a), (Mode::Left, b)]
                    }
                }
            };
            (succs, None)
        }
        _ => (Vec::new(), None),
    }
}

/// Counts, per hanging line label, the boundaries reached by the gap walk:
/// the number of walk paths from the start slots to each starry forgetting
/// boundary, `omega` when a cycle lies on the way.
fn walk_census(aut: &Automaton, rs: &[bool], starts: &[(Mode, usize)]) -> LabelledSet {
    type Node = (Mode, usize);
    let mut nodes: BTreeSet<Node> = starts.iter().copied().collect();
    let mut stack: Vec<Node> = starts.to_vec();
    let mut edges: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
    let mut emit: BTreeMap<Node, usize> = BTreeMap::new();
    while let Some(v) = stack.pop() {
        let (succs, em) = walk_succ(aut, rs, v.0, v.1);
        if let Some(c) = em {
            emit.insert(v, c);
        }
        for s2 in &succs {
            if nodes.insert(*s2) {
                stack.push(*s2);
            }
        }
        edges.insert(v, succs);
    }
    let mut indeg: BTreeMap<Node, usize> = nodes.iter().map(|&v| (v, 0)).collect();
    for succs in edges.values() {
        for s2 in succs {
            *indeg.get_mut(s2).expect("known node") += 1;
        }
    }
    let mut queue: Vec<Node> = indeg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&v, _)| v)
        .collect();
    let mut order: Vec<Node> = Vec::new();
    while let Some(v) = queue.pop() {
        order.push(v);
        for s2 in &edges[&v] {
            let d = indeg.get_mut(s2).expect("known node");
            *d -= 1;
            if *d == 0 {
                queue.push(*s2);
            }
        }
    }
    let peeled: BTreeSet<Node> = order.iter().copied().collect();
    let mut paths: BTreeMap<Node, u64> = BTreeMap::new();
    for v in starts {
        *paths.entry(*v).or_insert(0) += 1;
    }
    for v in &order {
        let pv = paths.get(v).copied().unwrap_or(0);
        for s2 in &edges[v] {
            if peeled.contains(s2) {
                let e = paths.entry(*s2).or_insert(0);
                *e = e.saturating_add(pv);
            }
        }
    }
    let mut out = LabelledSet::new();
    for (v, &c) in &emit {
        let label = format!("d@{}", aut.state_name(c));
        if peeled.contains(v) {
            let n = paths.get(v).copied().unwrap_or(0);
            if n > 0 {
                out.add(&label, Count::Finite(n));
            }
        } else {
            out.add(&label, Count::Omega);
        }
    }
    out
}

fn lfp(n: usize, f: impl Fn(&[bool], usize) -> bool) -> Vec<bool> {
    let mut v = vec![false; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            if !v[s] && f(&v, s) {
                v[s] = true;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}

/// Extracts a description scheme from a regular system over
/// `{cat, fg, om, star}`. Lines are labelled by the states heading them
/// (the root and starry forgetting boundaries); axis words are regular
/// arrangements over the states of each line region with cut letters
/// inserted where a boundary splits the line; multiplicities are path
/// censuses over the gap walk, with `omega` along cycles.
pub fn extract_scheme_regular(
    sys: &EquationSystem,
) -> Result<DescriptionScheme, SchemeError> {
    let aut = sys.to_automaton().prune();
    let n = aut.len();
    for s in 0..n {
        let sym = aut.step(s).sym.as_str();
        if !matches!(sym, "cat" | "fg" | "om" | "star") {
            return Err(SchemeError::UnsupportedSymbol(sym.to_string()));
        }
    }
    // Whether a star is reachable without crossing a forgetting operator.
    let rs = lfp(n, |v, s| {
        let step = aut.step(s);
        match step.sym.as_str() {
            "star" => true,
            "cat" => v[step.args[0]] || v[step.args[1]],
            _ => false,
        }
    });
    let init = aut.initial();
    if !rs[init] {
        return Err(SchemeError::EmptyAxis);
    }
    // Whether a starry forgetting boundary hangs anywhere in a star-free part.
    let bnd = lfp(n, |v, s| {
        let step = aut.step(s);
        match step.sym.as_str() {
            "fg" => rs[step.args[0]],
            "cat" => v[step.args[0]] || v[step.args[1]],
            _ => false,
        }
    });
    // Whether such a boundary hangs in the rightmost / leftmost gap.
    let fr = lfp(n, |v, s| {
        let step = aut.step(s);
        match step.sym.as_str() {
            "fg" => rs[step.args[0]],
            "cat" => {
                let (a, b) = (step.args[0], step.args[1]);
                if rs[b] {
                    v[b]
                } else {
                    bnd[b] || v[a]
                }
            }
            _ => false,
        }
    });
    let fl = lfp(n, |v, s| {
        let step = aut.step(s);
        match step.sym.as_str() {
            "fg" => rs[step.args[0]],
            "cat" => {
                let (a, b) = (step.args[0], step.args[1]);
                if rs[a] {
                    v[a]
                } else {
                    bnd[a] || v[b]
                }
            }
            _ => false,
        }
    });

    let mut dstates: BTreeSet<usize> = BTreeSet::new();
    dstates.insert(init);
    for s in 0..n {
        let step = aut.step(s);
        if step.sym == "fg" && rs[step.args[0]] {
            dstates.insert(step.args[0]);
        }
    }
    let mut cut_states: Vec<usize> = Vec::new();
    for s in 0..n {
        let step = aut.step(s);
        if step.sym == "cat" {
            let (a, b) = (step.args[0], step.args[1]);
            if rs[a] && rs[b] && (fr[a] || fl[b]) {
                cut_states.push(s);
            }
        }
    }

    let mut q_cut = BTreeSet::new();
    let mut q_tail = BTreeSet::new();
    let mut m = BTreeMap::new();
    for &s in &cut_states {
        let step = aut.step(s);
        let q = format!("k@{}", aut.state_name(s));
        let census = walk_census(&aut, &rs, &[(Mode::Right, step.args[0]), (Mode::Left, step.args[1])]);
        q_cut.insert(q.clone());
        m.insert(q, census);
    }
    let mut tails: BTreeMap<usize, String> = BTreeMap::new();
    for &r in &dstates {
        let census = walk_census(&aut, &rs, &[(Mode::Left, r)]);
        if !census.is_empty() {
            let q = format!("t@{}", aut.state_name(r));
            q_tail.insert(q.clone());
            m.insert(q.clone(), census);
            tails.insert(r, q);
        }
    }

    let mut letters: BTreeSet<String> = q_cut.union(&q_tail).cloned().collect();
    letters.insert("*".into());
    let sig = Signature::arrangement(letters);
    let wname = |s: usize| format!("w_{}", aut.state_name(s));
    let mut shared: Vec<(String, String, Vec<String>)> = Vec::new();
    for s in 0..n {
        let step = aut.step(s);
        match step.sym.as_str() {
            "star" => shared.push((wname(s), "*".into(), Vec::new())),
            "om" | "fg" => shared.push((wname(s), "om".into(), Vec::new())),
            "cat" => {
                let (a, b) = (step.args[0], step.args[1]);
                if cut_states.contains(&s) {
                    let aux = format!("wk_{}", aut.state_name(s));
                    let letter = format!("lt_k@{}", aut.state_name(s));
                    shared.push((wname(s), "cat".into(), vec![wname(a), aux.clone()]));
                    shared.push((aux, "cat".into(), vec![letter, wname(b)]));
                } else {
                    shared.push((wname(s), "cat".into(), vec![wname(a), wname(b)]));
                }
            }
            _ => unreachable!("symbols checked above"),
        }
    }
    for q in q_cut.iter().chain(&q_tail) {
        shared.push((format!("lt_{q}"), q.clone(), Vec::new()));
    }

    let mut w = BTreeMap::new();
    for &r in &dstates {
        let mut b = SystemBuilder::new(sig.clone());
        for (u, sym, args) in &shared {
            b.rule(u.clone(), sym.clone(), args.clone());
        }
        let root = if let Some(q) = tails.get(&r) {
            let root = format!("wt_{}", aut.state_name(r));
            b.rule(root.clone(), "cat", vec![format!("lt_{q}"), wname(r)]);
            root
        } else {
            wname(r)
        };
        let sysd = b.finish(&root)?;
        w.insert(format!("d@{}", aut.state_name(r)), WForm::Regular(RegularArrangement::new(sysd)?));
    }
    let d_ax = format!("d@{}", aut.state_name(init));
    DescriptionScheme::new(&d_ax, q_cut, q_tail, m, w)
}

// ---------------------------------------------------------------------------
// Scheme comparison.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeVerdict {
    Iso,
    NonIso,
    Unknown,
}

impl fmt::Display for SchemeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemeVerdict::Iso => "iso",
            SchemeVerdict::NonIso => "noniso",
            SchemeVerdict::Unknown => "unknown",
        };
        write!(f, "{s}")
    }
}

pub const EQUIV_UNFOLD_DEPTH: usize = 6;
pub const EQUIV_UNFOLD_WINDOW: usize = 6;

fn perms(items: &[String]) -> Vec<Vec<String>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, x) in items.iter().enumerate() {
        let mut rest: Vec<String> = items.to_vec();
        rest.remove(i);
        for mut p in perms(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

fn relabel_set(ls: &LabelledSet, map: &BTreeMap<String, String>) -> LabelledSet {
    LabelledSet::from_counts(
        ls.counts()
            .iter()
            .map(|(l, &c)| (map.get(l).cloned().unwrap_or_else(|| l.clone()), c)),
    )
}

fn w_equiv(
    wa: &WForm,
    wb: &WForm,
    map: &BTreeMap<String, String>,
    bw: usize,
) -> bool {
    let map_fin = |fa: &FiniteArrangement| {
        fa.map_labels(|l| Some(map.get(l).cloned().unwrap_or_else(|| l.to_string())))
    };
    match (wa.materialize_exact(), wb.materialize_exact()) {
        (Some(x), Some(y)) => finite_arr_iso(&map_fin(&x), &y),
        (Some(_), None) | (None, Some(_)) => false,
        (None, None) => match (wa, wb) {
            (WForm::Regular(x), WForm::Regular(y)) => {
                equivalence(&x.erase_relabel(map), y, bw) == Equivalence::Iso
            }
            _ => false,
        },
    }
}

fn label_bijection_exists(a: &DescriptionScheme, b: &DescriptionScheme, bw: usize) -> bool {
    if a.d_labels.len() != b.d_labels.len()
        || a.q_cut.len() != b.q_cut.len()
        || a.q_tail.len() != b.q_tail.len()
    {
        return false;
    }
    if a.d_labels.len() > 6 || a.q_cut.len() + a.q_tail.len() > 6 {
        return false;
    }
    let da: Vec<String> = a.d_labels.iter().cloned().collect();
    let qca: Vec<String> = a.q_cut.iter().cloned().collect();
    let qta: Vec<String> = a.q_tail.iter().cloned().collect();
    let db: Vec<String> = b.d_labels.iter().cloned().collect();
    let qcb: Vec<String> = b.q_cut.iter().cloned().collect();
    let qtb: Vec<String> = b.q_tail.iter().cloned().collect();
    for dp in perms(&db) {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        map.insert("*".into(), "*".into());
        for (x, y) in da.iter().zip(&dp) {
            map.insert(x.clone(), y.clone());
        }
        if map[&a.d_ax] != b.d_ax {
            continue;
        }
        for qcp in perms(&qcb) {
            for qtp in perms(&qtb) {
                let mut full = map.clone();
                for (x, y) in qca.iter().zip(&qcp) {
                    full.insert(x.clone(), y.clone());
                }
                for (x, y) in qta.iter().zip(&qtp) {
                    full.insert(x.clone(), y.clone());
                }
                let m_ok = a.m.iter().all(|(q, ls)| {
                    b.m.get(&full[q])
                        .map(|ls2| relabel_set(ls, &full).counts() == ls2.counts())
                        .unwrap_or(false)
                });
                if !m_ok {
                    continue;
                }
                let w_ok = a
                    .w
                    .iter()
                    .all(|(d, wf)| w_equiv(wf, &b.w[&full[d]], &full, bw));
                if w_ok {
                    return true;
                }
            }
        }
    }
    false
}

/// Sound three-valued scheme comparison. `Iso` when a label bijection
/// matches words and multiplicities, or when both unfold completely to
/// isomorphic trees; `NonIso` when complete unfoldings differ, or when one
/// is complete and the other already exceeds its size; otherwise `Unknown`.
pub fn scheme_equiv_bounded(
    a: &DescriptionScheme,
    b: &DescriptionScheme,
    k: usize,
    bw: usize,
) -> SchemeVerdict {
    if label_bijection_exists(a, b, bw) {
        return SchemeVerdict::Iso;
    }
    if let (Ok(ua), Ok(ub)) = (unfold_scheme(a, k, bw), unfold_scheme(b, k, bw)) {
        match (ua.complete, ub.complete) {
            (true, true) => {
                return if soa_iso(&ua.soa, &ub.soa) {
                    SchemeVerdict::Iso
                } else {
                    SchemeVerdict::NonIso
                }
            }
            (true, false) => {
                if ub.soa.forest().len() > ua.soa.forest().len() {
                    return SchemeVerdict::NonIso;
                }
            }
            (false, true) => {
                if ua.soa.forest().len() > ub.soa.forest().len() {
                    return SchemeVerdict::NonIso;
                }
            }
            (false, false) => {}
        }
    }
    SchemeVerdict::Unknown
}

pub fn scheme_equiv(a: &DescriptionScheme, b: &DescriptionScheme) -> SchemeVerdict {
    scheme_equiv_bounded(a, b, EQUIV_UNFOLD_DEPTH, EQUIV_UNFOLD_WINDOW)
}
