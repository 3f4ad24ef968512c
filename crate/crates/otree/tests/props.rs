//! Property tests: structural invariants that must hold on arbitrary
//! inputs, exercised through shrinkable term and structure strategies.

use std::collections::BTreeSet;

use proptest::prelude::*;

use otree::mso::{eval_mso, eval_mso_naive};
use otree::sampling::{random_closed_formula, random_structure, seeded};
use otree::structuring::SOAForest;
use otree::term::FiniteTerm;
use otree::value::{
    erase_nodes, soa_iso, term_of, val_algebraic, val_direct,
};

/// Arbitrary well-formed terms over cat/fg/om and quoted nodes; leaf
/// names are uniquified in preorder so occurrences stay injective.
fn term_strategy() -> impl Strategy<Value = FiniteTerm> {
    let leaf = prop_oneof![
        1 => Just(FiniteTerm::leaf("om")),
        3 => Just(FiniteTerm::leaf("'x")),
    ];
    leaf.prop_recursive(6, 40, 2, |inner| {
        prop_oneof![
            1 => inner.clone().prop_map(|t| FiniteTerm::new("fg", vec![t])),
            3 => (inner.clone(), inner).prop_map(|(a, b)| FiniteTerm::new("cat", vec![a, b])),
        ]
    })
    .prop_map(|t| uniquify(&t, &mut 0))
}

fn uniquify(t: &FiniteTerm, next: &mut usize) -> FiniteTerm {
    if t.children().is_empty() {
        if t.sym().starts_with('\'') {
            let name = format!("'n{next}");
            *next += 1;
            return FiniteTerm::leaf(&name);
        }
        return t.clone();
    }
    FiniteTerm::new(t.sym(), t.children().iter().map(|c| uniquify(c, next)).collect())
}

fn rename(t: &FiniteTerm) -> FiniteTerm {
    if t.children().is_empty() {
        if let Some(rest) = t.sym().strip_prefix('\'') {
            return FiniteTerm::leaf(&format!("'q{rest}"));
        }
        return t.clone();
    }
    FiniteTerm::new(t.sym(), t.children().iter().map(rename).collect())
}

proptest! {
    /// The two evaluation routes give the same structured forest.
    #[test]
    fn values_agree(t in term_strategy()) {
        prop_assert_eq!(val_direct(&t).unwrap(), val_algebraic(&t).unwrap());
    }

    /// Every value is a valid structured forest over a valid order.
    #[test]
    fn values_validate(t in term_strategy()) {
        let j = val_direct(&t).unwrap();
        prop_assert!(j.forest().validate().is_ok());
        prop_assert!(j.validate().is_ok());
    }

    /// Substituting hanging forests into the extended word of any line
    /// rebuilds the tree below it, exactly.
    #[test]
    fn recompose_equals_down(t in term_strategy()) {
        let j = val_direct(&t).unwrap();
        for li in 0..j.line_count() {
            prop_assert_eq!(j.recompose(li).unwrap(), j.down(li));
        }
    }

    /// Concatenation is associative on the nose, not just up to iso.
    #[test]
    fn concat_associates(a in term_strategy(), b in term_strategy(), c in term_strategy()) {
        let left = uniquify(
            &FiniteTerm::new("cat", vec![FiniteTerm::new("cat", vec![a.clone(), b.clone()]), c.clone()]),
            &mut 0,
        );
        let right = uniquify(
            &FiniteTerm::new("cat", vec![a, FiniteTerm::new("cat", vec![b, c])]),
            &mut 0,
        );
        prop_assert_eq!(val_direct(&left).unwrap(), val_direct(&right).unwrap());
    }

    /// Forgetting the axis twice is forgetting it once.
    #[test]
    fn fg_idempotent(t in term_strategy()) {
        let once = val_direct(&FiniteTerm::new("fg", vec![t.clone()])).unwrap();
        let twice =
            val_direct(&FiniteTerm::new("fg", vec![FiniteTerm::new("fg", vec![t])])).unwrap();
        prop_assert_eq!(once, twice);
    }

    /// Erasing leaves from the term matches restricting the value.
    #[test]
    fn erase_matches_induce(t in term_strategy(), mask in proptest::collection::vec(any::<bool>(), 64)) {
        let j = val_direct(&t).unwrap();
        let keep: BTreeSet<String> = j
            .forest()
            .nodes()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask[i % mask.len()])
            .map(|(_, n)| n.clone())
            .collect();
        let erased = val_direct(&erase_nodes(&t, &keep)).unwrap();
        prop_assert!(soa_iso(&erased, &j.induced(&keep).unwrap()));
    }

    /// A value rebuilt from its own structure evaluates back to itself.
    #[test]
    fn term_of_round_trips(t in term_strategy()) {
        let j = val_direct(&t).unwrap();
        prop_assert_eq!(&val_direct(&term_of(&j)).unwrap(), &j);
    }

    /// Isomorphism is reflexive and blind to node names.
    #[test]
    fn iso_respects_renaming(t in term_strategy()) {
        let j = val_direct(&t).unwrap();
        prop_assert!(soa_iso(&j, &j));
        let r = val_direct(&rename(&t)).unwrap();
        prop_assert!(soa_iso(&j, &r));
        prop_assert!(soa_iso(&r, &j));
    }

    /// Structured forests survive the JSON round trip unchanged.
    #[test]
    fn structuring_json_round_trips(t in term_strategy()) {
        let j = val_direct(&t).unwrap();
        let back = SOAForest::from_json(&j.to_json()).unwrap();
        prop_assert_eq!(back, j);
    }

    /// The memoized evaluator never diverges from the naive one.
    #[test]
    fn mso_memo_matches_naive(fseed in 0u64..1 << 48, sseed in 0u64..1 << 48, n in 1usize..=5) {
        let f = random_closed_formula(&mut seeded(fseed), 3);
        let s = random_structure(&mut seeded(sseed), n);
        let empty = Default::default();
        let fast = eval_mso(&s, &f, &empty);
        let slow = eval_mso_naive(&s, &f, &empty);
        prop_assert_eq!(format!("{fast:?}"), format!("{slow:?}"));
    }
}
