//! Values of terms over the tree algebra: concatenation, axis forgetting,
//! the empty forest and named nodes.
//!
//! A term over `cat`/`fg`/`om` and quoted node names denotes a structured
//! order-theoretic forest with axis. Two independent routes compute it:
//!
//! * [`val_direct`] reads the value off the term's positions: a node is
//!   below another iff its position is lexicographically smaller and the
//!   path from the other position up to their longest common prefix passes
//!   no `fg`; lines are the classes of the "clean path to the join"
//!   relation; the axis is the class with a clean path to the root.
//! * [`val_algebraic`] folds the term through the algebra operations
//!   [`soa_node`], [`soa_omega`], [`soa_fg`], [`soa_concat`].
//!
//! Both produce equal values node for node.

use crate::arrangement::fresh_key;
use crate::oforest::{OForest, OForestError};
use crate::position::{Dir, Position};
use crate::structuring::{SOAForest, StructuringError};
use crate::system::{EquationSystem, SystemError};
use crate::term::FiniteTerm;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ValueError {
    #[error("symbol `{sym}` with {got} arguments is not part of the tree algebra")]
    NotAlgebraTerm { sym: String, got: usize },
    #[error("node name `{0}` is used twice")]
    DuplicateNodeName(String),
    #[error("anonymous node `star` has no name here; name nodes or use approx_val")]
    UnnamedNode,
    #[error("node `{0}` does not occur in the term")]
    NoSuchNode(String),
    #[error("value has no such line")]
    NoSuchLine,
    #[error(transparent)]
    Forest(#[from] OForestError),
    #[error(transparent)]
    Structuring(#[from] StructuringError),
    #[error(transparent)]
    System(#[from] SystemError),
}

fn node_name(sym: &str) -> Option<&str> {
    sym.strip_prefix('\'').filter(|n| !n.is_empty())
}

/// Positions of the named nodes of an algebra term, keyed by name;
/// validates the term shape and name uniqueness.
pub fn occ_map(t: &FiniteTerm) -> Result<BTreeMap<String, Position>, ValueError> {
    let mut occ = BTreeMap::new();
    for (p, sym) in t.positions() {
        let kids = t.subterm_at(&p).expect("walked position").children().len();
        match (sym, kids) {
            ("cat", 2) | ("fg", 1) | ("om", 0) => {}
            ("star", 0) => return Err(ValueError::UnnamedNode),
            (s, 0) if node_name(s).is_some() => {
                let name = node_name(s).unwrap().to_string();
                if occ.insert(name.clone(), p).is_some() {
                    return Err(ValueError::DuplicateNodeName(name));
                }
            }
            (s, k) => {
                return Err(ValueError::NotAlgebraTerm { sym: s.to_string(), got: k })
            }
        }
    }
    Ok(occ)
}

/// No `fg` strictly between the ancestor `anc` and `pos`.
fn clean_path(t: &FiniteTerm, pos: &Position, anc: &Position) -> bool {
    let mut p = pos.clone();
    loop {
        let Some(parent) = p.parent() else { break };
        if parent.len() <= anc.len() {
            break;
        }
        if t.label_at(&parent) == Some("fg") {
            return false;
        }
        p = parent;
    }
    true
}

/// The value of a finite algebra term, read off its positions.
pub fn val_direct(t: &FiniteTerm) -> Result<SOAForest, ValueError> {
    let occ = occ_map(t)?;
    let names: Vec<String> = occ.keys().cloned().collect();
    let pos: Vec<&Position> = names.iter().map(|n| &occ[n]).collect();
    let n = names.len();
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    let mut class: Vec<usize> = (0..n).collect();
    fn find(class: &mut Vec<usize>, x: usize) -> usize {
        if class[x] != x {
            let r = find(class, class[x]);
            class[x] = r;
        }
        class[x]
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let join = pos[i].lcp(pos[j]);
            if pos[i].lex_cmp(pos[j]) == std::cmp::Ordering::Less
                && clean_path(t, pos[j], &join)
            {
                pairs.push((&names[i], &names[j]));
                if clean_path(t, pos[i], &join) {
                    let (a, b) = (find(&mut class, i), find(&mut class, j));
                    if a != b {
                        class[a] = b;
                    }
                }
            }
        }
    }
    let forest = OForest::from_pairs(names.clone(), &pairs)?;
    let mut per_class: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut class, i);
        per_class.entry(r).or_default().push(names[i].clone());
    }
    // The axis class: clean path all the way to the root, unless the root
    // forgets the axis.
    let root = Position::root();
    let axis_member: Option<&str> = if t.sym() == "fg" {
        None
    } else {
        (0..n)
            .find(|&i| clean_path(t, pos[i], &root))
            .map(|i| names[i].as_str())
    };
    let mut lines = Vec::new();
    let mut axis = None;
    for (_, members) in per_class {
        if axis_member.is_some_and(|m| members.iter().any(|x| x == m)) {
            axis = Some(lines.len());
        }
        lines.push(members);
    }
    Ok(SOAForest::new(forest, lines, axis)?)
}

/// A single named node: one line, which is the axis.
pub fn soa_node(name: &str) -> SOAForest {
    let forest = OForest::from_pairs([name], &[]).expect("single node");
    SOAForest::new(forest, vec![vec![name.to_string()]], Some(0)).expect("single node")
}

/// The empty forest.
pub fn soa_omega() -> SOAForest {
    let forest = OForest::from_pairs(Vec::<String>::new(), &[]).expect("empty");
    SOAForest::new(forest, Vec::new(), None).expect("empty")
}

/// Forgets the axis.
pub fn soa_fg(j: &SOAForest) -> SOAForest {
    let lines: Vec<Vec<String>> = (0..j.line_count())
        .map(|li| j.line_names(li).iter().map(|s| s.to_string()).collect())
        .collect();
    SOAForest::new(j.forest().clone(), lines, None).expect("axis removal")
}

/// Concatenation: disjoint union in which every left node lies below every
/// right axis node, and the two axes join into one line (the new axis).
/// Name collisions rename right-hand nodes deterministically (`x` to
/// `x#2`, `x#3`, ...).
pub fn soa_concat(left: &SOAForest, right: &SOAForest) -> SOAForest {
    let mut taken: BTreeSet<String> =
        left.forest().nodes().iter().cloned().collect();
    let renamed: Vec<String> = right
        .forest()
        .nodes()
        .iter()
        .map(|nm| fresh_key(nm, &mut taken))
        .collect();
    let nl = left.forest().len();
    let nr = right.forest().len();
    let n = nl + nr;
    let mut names = left.forest().nodes().to_vec();
    names.extend(renamed.iter().cloned());
    let mut leq = vec![false; n * n];
    for i in 0..nl {
        for j in 0..nl {
            leq[i * n + j] = left.forest().leq_idx(i, j);
        }
    }
    for i in 0..nr {
        for j in 0..nr {
            leq[(nl + i) * n + (nl + j)] = right.forest().leq_idx(i, j);
        }
    }
    if let Some(ra) = right.axis() {
        for &a in right.line(ra) {
            for i in 0..nl {
                leq[i * n + (nl + a)] = true;
            }
        }
    }
    let forest = OForest::from_matrix(names, leq).expect("concatenation order");
    let mut lines: Vec<Vec<String>> = Vec::new();
    let mut axis = None;
    let right_line = |li: usize| -> Vec<String> {
        right.line(li).iter().map(|&i| renamed[i].clone()).collect()
    };
    let left_line = |li: usize| -> Vec<String> {
        left.line_names(li).iter().map(|s| s.to_string()).collect()
    };
    match (left.axis(), right.axis()) {
        (Some(la), Some(ra)) => {
            let mut merged = left_line(la);
            merged.extend(right_line(ra));
            axis = Some(0);
            lines.push(merged);
        }
        (Some(la), None) => {
            axis = Some(0);
            lines.push(left_line(la));
        }
        (None, Some(ra)) => {
            axis = Some(0);
            lines.push(right_line(ra));
        }
        (None, None) => {}
    }
    for li in 0..left.line_count() {
        if Some(li) != left.axis() {
            lines.push(left_line(li));
        }
    }
    for li in 0..right.line_count() {
        if Some(li) != right.axis() {
            lines.push(right_line(li));
        }
    }
    SOAForest::new(forest, lines, axis).expect("concatenation structuring")
}

/// The value computed by folding through the algebra operations.
pub fn val_algebraic(t: &FiniteTerm) -> Result<SOAForest, ValueError> {
    // Validate shape and name uniqueness up front so both routes accept
    // exactly the same terms.
    occ_map(t)?;
    fn go(t: &FiniteTerm) -> SOAForest {
        match (t.sym(), t.children()) {
            ("cat", [a, b]) => soa_concat(&go(a), &go(b)),
            ("fg", [a]) => soa_fg(&go(a)),
            ("om", []) => soa_omega(),
            (s, []) => soa_node(node_name(s).expect("validated")),
            _ => unreachable!("validated"),
        }
    }
    Ok(go(t))
}

/// Keeps the named nodes in `keep` and erases the rest (they become `om`).
pub fn erase_nodes(t: &FiniteTerm, keep: &BTreeSet<String>) -> FiniteTerm {
    match (node_name(t.sym()), t.children().is_empty()) {
        (Some(name), true) if !keep.contains(name) => FiniteTerm::leaf("om"),
        _ => FiniteTerm::new(
            t.sym(),
            t.children().iter().map(|c| erase_nodes(c, keep)).collect(),
        ),
    }
}

/// The topmost position reachable from the occurrence of `member` without
/// crossing `fg`: the representative position of the member's line.
pub fn rep_line(t: &FiniteTerm, member: &str) -> Result<Position, ValueError> {
    let occ = occ_map(t)?;
    let mut p = occ
        .get(member)
        .ok_or_else(|| ValueError::NoSuchNode(member.to_string()))?
        .clone();
    while let Some(parent) = p.parent() {
        if t.label_at(&parent) == Some("fg") {
            break;
        }
        p = parent;
    }
    Ok(p)
}

/// The deepest join between the two sides of a cut: the representative
/// position of the cut.
pub fn rep_cut(
    t: &FiniteTerm,
    left: &[&str],
    right: &[&str],
) -> Result<Position, ValueError> {
    let occ = occ_map(t)?;
    let mut best: Option<Position> = None;
    for l in left {
        let pl = occ
            .get(*l)
            .ok_or_else(|| ValueError::NoSuchNode(l.to_string()))?;
        for r in right {
            let pr = occ
                .get(*r)
                .ok_or_else(|| ValueError::NoSuchNode(r.to_string()))?;
            let j = pl.lcp(pr);
            if best.as_ref().map_or(true, |b| j.len() > b.len()) {
                best = Some(j);
            }
        }
    }
    best.ok_or(ValueError::NoSuchLine)
}

// ---------------------------------------------------------------------------
// Isomorphism.

/// Canonical code of a structured forest with axis, invariant under node
/// renaming: a tree code lists its axis with cut and tail slots expanded
/// recursively; a forest code is the sorted multiset of its tree codes.
fn soa_code(j: &SOAForest) -> String {
    match j.axis() {
        Some(a) => {
            let comp = j.down(a);
            let comp_names: BTreeSet<String> =
                comp.forest().nodes().iter().cloned().collect();
            let rest: BTreeSet<String> = j
                .forest()
                .nodes()
                .iter()
                .filter(|n| !comp_names.contains(*n))
                .cloned()
                .collect();
            let rest_code = if rest.is_empty() {
                String::new()
            } else {
                let r = j.induced(&rest).expect("own nodes");
                format!("+{}", forest_code(&r))
            };
            format!("A{}{}", tree_code(&comp), rest_code)
        }
        None => forest_code(j),
    }
}

fn tree_code(j: &SOAForest) -> String {
    let a = j.axis().expect("tree code needs an axis");
    let mut out = String::from("T(");
    let tail = j.tail(a);
    if !tail.forest().is_empty() {
        out.push_str("t:");
        out.push_str(&forest_code(&tail));
        out.push(';');
    }
    let cuts = j.cuts(a);
    let mut ci = 0;
    for i in 0..=j.line(a).len() {
        while ci < cuts.len() && cuts[ci].left_size == i {
            out.push_str("k:");
            out.push_str(&forest_code(&j.def_of(cuts[ci])));
            out.push(';');
            ci += 1;
        }
        if i < j.line(a).len() {
            out.push('*');
        }
    }
    out.push(')');
    out
}

fn forest_code(j: &SOAForest) -> String {
    let ids = j.forest().component_ids();
    let count = ids.iter().copied().max().map_or(0, |m| m + 1);
    let mut codes: Vec<String> = (0..count)
        .map(|c| {
            let keep: BTreeSet<String> = (0..j.forest().len())
                .filter(|&i| ids[i] == c)
                .map(|i| j.forest().name(i).to_string())
                .collect();
            let mut comp = j.induced(&keep).expect("own nodes");
            // A structured tree has a unique upwards closed line: its axis.
            let axes = comp.axes();
            debug_assert_eq!(axes.len(), 1);
            comp = comp.with_axis(Some(axes[0]));
            tree_code(&comp)
        })
        .collect();
    codes.sort();
    format!("F{{{}}}", codes.join(","))
}

/// Isomorphism of structured forests with axis: same shape up to node
/// renaming (order, line partition and axis all preserved).
pub fn soa_iso(a: &SOAForest, b: &SOAForest) -> bool {
    soa_code(a) == soa_code(b)
}

/// Canonical code of a finite order-theoretic forest: each node has at most
/// one cover, so the order is a forest of rooted trees and the classic
/// sorted-children encoding applies.
fn otree_code(f: &OForest) -> String {
    fn node_code(f: &OForest, children: &BTreeMap<usize, Vec<usize>>, i: usize) -> String {
        let mut kids: Vec<String> = children
            .get(&i)
            .map(|cs| cs.iter().map(|&c| node_code(f, children, c)).collect())
            .unwrap_or_default();
        kids.sort();
        format!("({})", kids.join(""))
    }
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut roots = Vec::new();
    for i in 0..f.len() {
        match f.parent(i) {
            Some(p) => children.entry(p).or_default().push(i),
            None => roots.push(i),
        }
    }
    let mut codes: Vec<String> = roots
        .iter()
        .map(|&r| node_code(f, &children, r))
        .collect();
    codes.sort();
    codes.join("")
}

/// Isomorphism of finite order-theoretic forests (order only, no lines).
pub fn otree_iso(a: &OForest, b: &OForest) -> bool {
    otree_code(a) == otree_code(b)
}

// ---------------------------------------------------------------------------
// Rebuilding a term from a value.

/// A term denoting the given value exactly: `val_direct(term_of(j))`
/// equals `j` node for node.
pub fn term_of(j: &SOAForest) -> FiniteTerm {
    if j.forest().is_empty() {
        return FiniteTerm::leaf("om");
    }
    match j.axis() {
        Some(a) => {
            let comp = j.down(a);
            let comp_names: BTreeSet<String> =
                comp.forest().nodes().iter().cloned().collect();
            let rest: BTreeSet<String> = j
                .forest()
                .nodes()
                .iter()
                .filter(|n| !comp_names.contains(*n))
                .cloned()
                .collect();
            let mut term = term_of_tree(&comp);
            if !rest.is_empty() {
                let r = j.induced(&rest).expect("own nodes");
                term = FiniteTerm::new(
                    "cat",
                    vec![term, FiniteTerm::new("fg", vec![term_of_forest(&r)])],
                );
            }
            term
        }
        None => {
            let inner = term_of_forest(j);
            if j.forest().components().len() == 1 {
                FiniteTerm::new("fg", vec![inner])
            } else {
                inner
            }
        }
    }
}

fn term_of_tree(j: &SOAForest) -> FiniteTerm {
    let a = j.axis().expect("tree term needs an axis");
    let mut items: Vec<FiniteTerm> = Vec::new();
    let tail = j.tail(a);
    if !tail.forest().is_empty() {
        items.push(FiniteTerm::new("fg", vec![term_of_forest(&tail)]));
    }
    let cuts = j.cuts(a);
    let mut ci = 0;
    let line = j.line(a).to_vec();
    for i in 0..=line.len() {
        while ci < cuts.len() && cuts[ci].left_size == i {
            items.push(FiniteTerm::new(
                "fg",
                vec![term_of_forest(&j.def_of(cuts[ci]))],
            ));
            ci += 1;
        }
        if i < line.len() {
            items.push(FiniteTerm::leaf(format!("'{}", j.forest().name(line[i]))));
        }
    }
    items
        .into_iter()
        .rev()
        .reduce(|acc, item| FiniteTerm::new("cat", vec![item, acc]))
        .expect("line is nonempty")
}

/// Forest without axis: the composing trees, each wrapped in `fg`, joined
/// by `cat`.
fn term_of_forest(j: &SOAForest) -> FiniteTerm {
    let ids = j.forest().component_ids();
    let count = ids.iter().copied().max().map_or(0, |m| m + 1);
    let comps: Vec<FiniteTerm> = (0..count)
        .map(|c| {
            let keep: BTreeSet<String> = (0..j.forest().len())
                .filter(|&i| ids[i] == c)
                .map(|i| j.forest().name(i).to_string())
                .collect();
            let mut comp = j.induced(&keep).expect("own nodes");
            let axes = comp.axes();
            comp = comp.with_axis(Some(axes[0]));
            FiniteTerm::new("fg", vec![term_of_tree(&comp)])
        })
        .collect();
    comps
        .into_iter()
        .rev()
        .reduce(|acc, item| FiniteTerm::new("cat", vec![item, acc]))
        .unwrap_or_else(|| FiniteTerm::leaf("om"))
}

// ---------------------------------------------------------------------------
// Approximants of regular values.

/// Replaces each `star` leaf by a node named after its position.
fn name_stars(t: &FiniteTerm) -> FiniteTerm {
    fn go(t: &FiniteTerm, here: &Position) -> FiniteTerm {
        if t.sym() == "star" && t.children().is_empty() {
            return FiniteTerm::leaf(format!("'@{here}"));
        }
        FiniteTerm::new(
            t.sym(),
            t.children()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let d = if i == 0 { Dir::Left } else { Dir::Right };
                    go(c, &here.child(d))
                })
                .collect(),
        )
    }
    go(t, &Position::root())
}

/// The value of the depth-`l` truncation of a regular term: positions of
/// length `l` become `om`, surviving `star` nodes are named `@<position>`.
/// Growing `l` only adds nodes; the restriction to an earlier node set
/// gives the earlier value back.
pub fn approx_val(sys: &EquationSystem, l: usize) -> Result<SOAForest, ValueError> {
    let t = sys.to_automaton().truncate(l, "om")?;
    val_direct(&name_stars(&t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::parse_system;
    use crate::term::{parse_term, Signature};

    fn soa(src: &str) -> FiniteTerm {
        parse_term(src, &Signature::soa()).unwrap()
    }

    fn val(src: &str) -> SOAForest {
        val_direct(&soa(src)).unwrap()
    }

    #[test]
    fn tiny_values() {
        let single = val("'a");
        assert_eq!(single.forest().len(), 1);
        assert_eq!(single.line_names(single.axis().unwrap()), ["a"]);

        let chain = val("'a cat 'b");
        assert_eq!(chain.forest().leq("a", "b"), Some(true));
        assert_eq!(chain.line_count(), 1);
        assert_eq!(chain.line_names(chain.axis().unwrap()), ["a", "b"]);

        let pend = val("fg('b) cat 'a");
        assert_eq!(pend.forest().leq("b", "a"), Some(true));
        assert_eq!(pend.line_count(), 2);
        assert_eq!(pend.line_names(pend.axis().unwrap()), ["a"]);
        let axis = pend.axis().unwrap();
        let tails: Vec<&str> = pend
            .tail_nodes(axis)
            .iter()
            .map(|&i| pend.forest().name(i))
            .collect();
        assert_eq!(tails, ["b"]);

        let two = val("fg('a) cat fg('b)");
        assert_eq!(two.forest().leq("a", "b"), Some(false));
        assert_eq!(two.axis(), None);
        assert_eq!(two.forest().components().len(), 2);

        assert!(val("om").forest().is_empty());
        assert_eq!(val("fg('a)").axis(), None);
    }

    #[test]
    fn invalid_terms() {
        let sig = Signature::new([("f", 1), ("a", 0)]);
        let t = parse_term("f(a)", &sig).unwrap();
        assert!(matches!(
            val_direct(&t),
            Err(ValueError::NotAlgebraTerm { .. })
        ));
        let dup = soa("'a cat 'a");
        assert_eq!(
            val_direct(&dup).unwrap_err(),
            ValueError::DuplicateNodeName("a".into())
        );
        let star = parse_term("star cat 'a", &Signature::soa_star()).unwrap();
        assert_eq!(val_direct(&star).unwrap_err(), ValueError::UnnamedNode);
    }

    /// Axis {a,b} over a pendant forest: e and f below d, d below c, the
    /// block {c,d} incomparable with a.
    fn nested() -> FiniteTerm {
        soa("'a cat (fg(((fg('e) cat fg('f)) cat 'd) cat 'c) cat 'b)")
    }

    #[test]
    fn nested_golden_order_and_lines() {
        let v = val_direct(&nested()).unwrap();
        let f = v.forest();
        let expect_lt = [
            ("a", "b"),
            ("e", "d"),
            ("f", "d"),
            ("d", "c"),
            ("e", "c"),
            ("f", "c"),
            ("c", "b"),
            ("d", "b"),
            ("e", "b"),
            ("f", "b"),
        ];
        for a in ["a", "b", "c", "d", "e", "f"] {
            for b in ["a", "b", "c", "d", "e", "f"] {
                let want = a == b || expect_lt.contains(&(a, b));
                assert_eq!(f.leq(a, b), Some(want), "{a} <= {b}");
            }
        }
        let lines: BTreeSet<Vec<&str>> =
            (0..v.line_count()).map(|li| v.line_names(li)).collect();
        let expect: BTreeSet<Vec<&str>> =
            [vec!["a", "b"], vec!["d", "c"], vec!["e"], vec!["f"]].into_iter().collect();
        assert_eq!(lines, expect);
        assert_eq!(v.line_names(v.axis().unwrap()), ["a", "b"]);
        // One axis cut with all four deep nodes defining it.
        let axis = v.axis().unwrap();
        let cuts = v.cuts(axis);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].left_size, 1);
        let def: Vec<&str> = v
            .definers(cuts[0])
            .iter()
            .map(|&i| v.forest().name(i))
            .collect();
        assert_eq!(def, ["c", "d", "e", "f"]);
        // Tail of the {c,d} line is {e, f}.
        let cd = v.line_of_name("c").unwrap();
        let tail: Vec<&str> =
            v.tail_nodes(cd).iter().map(|&i| v.forest().name(i)).collect();
        assert_eq!(tail, ["e", "f"]);
        assert_eq!(v.u_plus(axis).to_string(), "* k0.1 *");
    }

    #[test]
    fn representative_positions() {
        let t = nested();
        assert_eq!(rep_line(&t, "c").unwrap().to_string(), "211");
        assert_eq!(rep_line(&t, "d").unwrap().to_string(), "211");
        assert_eq!(rep_line(&t, "a").unwrap(), Position::root());
        // The single-cut fixture: the deepest join of the two sides is the
        // root.
        let t2 = soa("('a cat 'b) cat (fg('x) cat ('c cat ('d cat 'e)))");
        assert_eq!(rep_cut(&t2, &["a", "b"], &["c", "d", "e"]).unwrap(), Position::root());
        assert!(rep_line(&t, "zz").is_err());
    }

    #[test]
    fn single_cut_fixture() {
        let v = val("('a cat 'b) cat (fg('x) cat ('c cat ('d cat 'e)))");
        let axis = v.axis().unwrap();
        assert_eq!(v.line_names(axis), ["a", "b", "c", "d", "e"]);
        let cuts = v.cuts(axis);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].left_size, 2);
        assert_eq!(v.u_plus(axis).to_string(), "* * k0.2 * * *");
        let def: Vec<&str> = v
            .definers(cuts[0])
            .iter()
            .map(|&i| v.forest().name(i))
            .collect();
        assert_eq!(def, ["x"]);
    }

    #[test]
    fn both_routes_agree() {
        for src in [
            "'a",
            "om",
            "'a cat 'b",
            "fg('b) cat 'a",
            "fg('a) cat fg('b)",
            "fg(fg('a cat 'b) cat 'c)",
            "'a cat (fg(((fg('e) cat fg('f)) cat 'd) cat 'c) cat 'b)",
            "('a cat 'b) cat (fg('x) cat ('c cat ('d cat 'e)))",
            "(fg('a cat 'b) cat ('c cat (fg('e) cat 'd))) cat (fg('g cat 'h) cat 'f)",
        ] {
            let t = soa(src);
            assert_eq!(val_direct(&t).unwrap(), val_algebraic(&t).unwrap(), "{src}");
        }
    }

    #[test]
    fn concat_renames_collisions() {
        let a = soa_node("x");
        let b = soa_node("x");
        let c = soa_concat(&a, &b);
        assert_eq!(c.forest().nodes(), ["x", "x#2"]);
        assert_eq!(c.forest().leq("x", "x#2"), Some(true));
    }

    #[test]
    fn erase_and_induce() {
        let t = nested();
        for keep in [
            vec!["a", "b"],
            vec!["c", "d", "e", "f"],
            vec!["a", "c", "e"],
            vec!["e", "f"],
            vec![],
        ] {
            let keep: BTreeSet<String> = keep.into_iter().map(String::from).collect();
            let erased = val_direct(&erase_nodes(&t, &keep)).unwrap();
            let induced = val_direct(&t).unwrap().induced(&keep).unwrap();
            assert_eq!(erased, induced);
        }
    }

    #[test]
    fn iso_and_codes() {
        let a = val("'a cat 'b");
        let b = val("'x cat 'y");
        assert!(soa_iso(&a, &b));
        assert!(!soa_iso(&a, &val("fg('x) cat 'y")));
        assert!(!soa_iso(&a, &val("'x cat ('y cat 'z)")));
        assert!(soa_iso(&soa_omega(), &val("om")));
        // Same order, different structuring: not isomorphic as structured
        // forests.
        let with_axis = val("'a");
        let without = val("fg('a)");
        assert!(!soa_iso(&with_axis, &without));
        assert!(otree_iso(with_axis.forest(), without.forest()));
        // Renaming a big term preserves the value up to iso.
        let big = val("'a cat (fg(((fg('e) cat fg('f)) cat 'd) cat 'c) cat 'b)");
        let ren = val("'p cat (fg(((fg('q) cat fg('r)) cat 's) cat 't) cat 'u)");
        assert!(soa_iso(&big, &ren));
        // Order isomorphism ignores lines but not the order.
        assert!(!otree_iso(big.forest(), a.forest()));
        let lam = OForest::from_pairs(["r", "x", "y"], &[("x", "r"), ("y", "r")]).unwrap();
        let lam2 = OForest::from_pairs(["1", "2", "3"], &[("3", "2"), ("1", "2")]).unwrap();
        assert!(otree_iso(&lam, &lam2));
        let chain = OForest::from_pairs(["1", "2", "3"], &[("1", "2"), ("2", "3")]).unwrap();
        assert!(!otree_iso(&lam, &chain));
    }

    #[test]
    fn term_of_round_trip() {
        for src in [
            "'a",
            "om",
            "'a cat 'b",
            "fg('b) cat 'a",
            "fg('a) cat fg('b)",
            "fg(fg('a cat 'b) cat 'c)",
            "'a cat (fg(((fg('e) cat fg('f)) cat 'd) cat 'c) cat 'b)",
            "('a cat 'b) cat (fg('x) cat ('c cat ('d cat 'e)))",
        ] {
            let v = val(src);
            let back = term_of(&v);
            assert_eq!(val_direct(&back).unwrap(), v, "{src} -> {back}");
        }
    }

    #[test]
    fn approximants() {
        let sig = Signature::soa_star();
        let t0 = parse_system("let t0 = t0 cat (star cat t0); root t0;", &sig).unwrap();
        let v3 = approx_val(&t0, 3).unwrap();
        assert_eq!(v3.forest().nodes(), ["@21"]);
        let v4 = approx_val(&t0, 4).unwrap();
        assert_eq!(v4.forest().nodes().len(), 2);
        assert!(v4.forest().nodes().contains(&"@121".to_string()));
        // All nodes on one dense axis line.
        assert_eq!(v4.line_count(), 1);
        assert!(v4.axis().is_some());
        // Restriction to the earlier node set gives the earlier value.
        let keep: BTreeSet<String> = v3.forest().nodes().iter().cloned().collect();
        assert_eq!(v4.induced(&keep).unwrap(), v3);
        // Star census matches the automaton's occurrence language.
        let aut = t0.to_automaton();
        for l in 1..7 {
            let v = approx_val(&t0, l).unwrap();
            let expect = aut
                .occurrences_language("star")
                .enumerate(l.saturating_sub(1))
                .len();
            assert_eq!(v.forest().len(), expect, "depth {l}");
        }
    }
}
