//! The MSO route to structurings: encode a structured forest as a
//! relational structure, then recognize lines and covering with formulas
//! cross-checked against the direct algorithms.

use std::collections::BTreeMap;

use otree::corpus;
use otree::mso::{
    check_covers, check_line, covers_formula, encode_structuring, eval_mso, line_formula,
    parse_formula, structuring_sentence, MSOVal,
};

fn main() {
    let j = corpus::two_level_tree();
    let s = encode_structuring(&j);
    println!("structure: {} elements, relations {:?}", s.size(), s.rels().keys().collect::<Vec<_>>());

    let phi = structuring_sentence();
    let env = BTreeMap::new();
    println!("valid encoding: {}", eval_mso(&s, &phi, &env).unwrap());

    let theta1 = line_formula();
    let theta2 = covers_formula();
    let n = s.size();
    let mask_of = |names: &[&str]| -> u64 {
        names
            .iter()
            .map(|nm| 1u64 << s.names().iter().position(|x| x == nm).unwrap())
            .sum()
    };
    for cand in [vec!["a1", "a2"], vec!["b1"], vec!["a1", "b1"]] {
        let mask = mask_of(&cand);
        let mut env = BTreeMap::new();
        env.insert("U".to_string(), MSOVal::Set(mask));
        let by_formula = eval_mso(&s, &theta1, &env).unwrap();
        let set = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        assert_eq!(by_formula, check_line(&s, &set));
        println!("is {cand:?} a line: {by_formula}");
    }

    let (u, w) = (mask_of(&["b1"]), mask_of(&["a1", "a2"]));
    let mut env = BTreeMap::new();
    env.insert("U".to_string(), MSOVal::Set(u));
    env.insert("W".to_string(), MSOVal::Set(w));
    let by_formula = eval_mso(&s, &theta2, &env).unwrap();
    let us = (0..n).filter(|i| u & (1 << i) != 0).collect();
    let ws = (0..n).filter(|i| w & (1 << i) != 0).collect();
    assert_eq!(by_formula, check_covers(&s, &us, &ws));
    println!("{{b1}} covered by the axis: {by_formula}");

    // Ad-hoc queries work on the same structure.
    let f = parse_formula("(ex x (all y (leq y x)))").unwrap();
    println!("has a greatest element: {}", eval_mso(&s, &f, &BTreeMap::new()).unwrap());
}
