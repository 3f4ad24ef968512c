//! Canonical fixtures shared by tests, examples and the command line:
//! regular systems with known occurrence languages, finite terms with
//! known values, and description schemes with known unfoldings.

use std::collections::{BTreeMap, BTreeSet};

use crate::arrangement::{FiniteArrangement, LabelledSet};
use crate::oforest::OForest;
use crate::scheme::{DescriptionScheme, WForm};
use crate::structuring::SOAForest;
use crate::system::{parse_system, Count, EquationSystem};
use crate::term::{parse_term, FiniteTerm, Signature};

/// The dense word over `a`: `t2 = t2 . s`, `s = a . t2`. Its position
/// language is `(1|22)*(e|2|21)` with the `a`-occurrences at `(1|22)*21`.
pub fn rational_word_system() -> EquationSystem {
    parse_system(
        "let t2 = cat(t2, s); let s = cat(a, t2); root t2;",
        &Signature::arrangement(["a"]),
    )
    .expect("fixture parses")
}

/// The alternating word `abab...`: positions `2*1`, even repetitions of
/// `2` labelled `a`, odd ones `b`.
pub fn alternating_word_system() -> EquationSystem {
    parse_system(
        "let w = cat(a, cat(b, w)); root w;",
        &Signature::arrangement(["a", "b"]),
    )
    .expect("fixture parses")
}

/// A dense forest of anonymous nodes: one line, no cuts, no pendants.
pub fn dense_forest_system() -> EquationSystem {
    parse_system(
        "let t0 = cat(t0, cat(star, t0)); root t0;",
        &Signature::soa_star(),
    )
    .expect("fixture parses")
}

/// A dense axis with a dense pendant forest hanging at every cut.
pub fn pendant_forest_system() -> EquationSystem {
    parse_system(
        "let t1 = cat(t1, cat(fg(star), t0)); let t0 = cat(t0, cat(star, t0)); root t1;",
        &Signature::soa_star(),
    )
    .expect("fixture parses")
}

/// Axis `u < v` with tail `{w}`: the representative of the axis is the
/// root and the tail is defined below it.
pub fn axis_with_tail_term() -> FiniteTerm {
    parse_term("fg('w) cat ('u cat 'v)", &Signature::soa()).expect("fixture parses")
}

/// A guarded pair `a < b` with no axis: the root is a pendant former, so
/// the single line stays at depth 1.
pub fn rootless_pair_term() -> FiniteTerm {
    parse_term("fg(om cat ('a cat ('b cat fg(om))))", &Signature::soa())
        .expect("fixture parses")
}

/// Six nodes in four lines: axis `{a,b}`, inner line `{c,d}` whose tail is
/// the two incomparable pendants `{e}` and `{f}`.
pub fn six_node_tree_term() -> FiniteTerm {
    parse_term(
        "'a cat (fg(((fg('e) cat fg('f)) cat 'd) cat 'c) cat 'b)",
        &Signature::soa(),
    )
    .expect("fixture parses")
}

/// Axis `a < b < c < d < e` with pendants `y`, `x`, `z`; `x` defines the
/// axis cut `({a,b},{c,d,e})` whose definers exclude `y` and `z`.
pub fn five_line_axis_term() -> FiniteTerm {
    parse_term(
        "('a cat ((fg('y) cat 'b) cat (fg('x) cat ('c cat (fg('z) cat 'd))))) cat 'e",
        &Signature::soa(),
    )
    .expect("fixture parses")
}

/// Axis `a < b < c < d < e` with a single pendant `x` defining the cut
/// `({a,b},{c,d,e})`; its extended axis word reads `* * cut * * *`.
pub fn cut_after_two_stars_term() -> FiniteTerm {
    parse_term(
        "('a cat 'b) cat (fg('x) cat ('c cat ('d cat 'e)))",
        &Signature::soa(),
    )
    .expect("fixture parses")
}

/// One line label whose word is a tail letter followed by one star: the
/// unfolding is the reversed chain of the naturals, all lines singletons.
pub fn reversed_chain_scheme() -> DescriptionScheme {
    let m = BTreeMap::from([(
        "q".to_string(),
        LabelledSet::from_counts([("d", Count::Finite(1))]),
    )]);
    let w = BTreeMap::from([(
        "d".to_string(),
        WForm::Finite(FiniteArrangement::from_labels(["q", "*"])),
    )]);
    DescriptionScheme::new("d", BTreeSet::new(), BTreeSet::from(["q".to_string()]), m, w)
        .expect("fixture validates")
}

/// The scheme of the one-node tree: a single star, no cuts, no tail.
pub fn singleton_scheme() -> DescriptionScheme {
    let w = BTreeMap::from([(
        "d".to_string(),
        WForm::Finite(FiniteArrangement::from_labels(["*"])),
    )]);
    DescriptionScheme::new("d", BTreeSet::new(), BTreeSet::new(), BTreeMap::new(), w)
        .expect("fixture validates")
}

/// A five-element axis with two cut letters and a tail letter; one cut
/// letter hangs infinitely many copies of the two-star line shape, so the
/// described tree is infinite.
pub fn branching_scheme() -> DescriptionScheme {
    let q_cut = BTreeSet::from(["p".to_string(), "q".to_string()]);
    let q_tail = BTreeSet::from(["z".to_string()]);
    let m = BTreeMap::from([
        (
            "z".to_string(),
            LabelledSet::from_counts([("beta", Count::Finite(1)), ("gamma", Count::Finite(2))]),
        ),
        (
            "p".to_string(),
            LabelledSet::from_counts([("beta", Count::Finite(2)), ("gamma", Count::Finite(1))]),
        ),
        (
            "q".to_string(),
            LabelledSet::from_counts([("beta", Count::Finite(1)), ("gamma", Count::Omega)]),
        ),
    ]);
    let w = BTreeMap::from([
        (
            "alpha".to_string(),
            WForm::Finite(FiniteArrangement::from_labels([
                "z", "*", "p", "*", "q", "*", "p", "*", "q", "*",
            ])),
        ),
        (
            "beta".to_string(),
            WForm::Finite(FiniteArrangement::from_labels(["*"])),
        ),
        (
            "gamma".to_string(),
            WForm::Finite(FiniteArrangement::from_labels(["*", "*"])),
        ),
    ]);
    DescriptionScheme::new("alpha", q_cut, q_tail, m, w).expect("fixture validates")
}

/// A hand-built structured tree: axis `a1 < a2`, pendant lines `{b1}` and
/// `{d1}` hanging below `a2`, with `{c1}` below `b1` and `{e1}` below
/// `d1`.
pub fn two_level_tree() -> SOAForest {
    let forest = OForest::from_pairs(
        ["a1", "a2", "b1", "c1", "d1", "e1"],
        &[("a1", "a2"), ("b1", "a2"), ("c1", "b1"), ("d1", "a2"), ("e1", "d1")],
    )
    .expect("fixture is a valid forest");
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
    .expect("fixture is a valid structuring")
}
