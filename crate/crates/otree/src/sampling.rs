//! Seeded random generators and exhaustive enumerations used by the test
//! suites and examples: terms, subsets, relational structures, and closed
//! formulas. All generators are deterministic for a fixed seed.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::mso::{MSOFormula, RelStructure};
use crate::term::FiniteTerm;
use crate::value::val_direct;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fresh_node(next: &mut usize) -> FiniteTerm {
    let t = FiniteTerm::leaf(format!("'n{next}"));
    *next += 1;
    t
}

fn build(rng: &mut ChaCha8Rng, budget: usize, next: &mut usize) -> FiniteTerm {
    if budget >= 3 && rng.gen_bool(0.55) {
        let left = rng.gen_range(1..=budget - 2);
        let a = build(rng, left, next);
        let b = build(rng, budget - 1 - left, next);
        return FiniteTerm::new("cat", vec![a, b]);
    }
    if budget >= 2 && rng.gen_bool(0.4) {
        let c = build(rng, budget - 1, next);
        return FiniteTerm::new("fg", vec![c]);
    }
    if rng.gen_bool(0.15) {
        FiniteTerm::leaf("om")
    } else {
        fresh_node(next)
    }
}

/// A random term over `cat`/`fg`/`om` and fresh quoted nodes with at most
/// `max_positions` positions; node names are unique within the term.
pub fn random_node_term(rng: &mut ChaCha8Rng, max_positions: usize) -> FiniteTerm {
    let budget = rng.gen_range(1..=max_positions.max(1));
    let mut next = 0;
    build(rng, budget, &mut next)
}

/// A random term whose value is nonempty and has an axis (rejection
/// sampling over [`random_node_term`]).
pub fn random_axis_term(rng: &mut ChaCha8Rng, max_positions: usize) -> FiniteTerm {
    loop {
        let t = random_node_term(rng, max_positions);
        if let Ok(j) = val_direct(&t) {
            if !j.forest().is_empty() && j.axis().is_some() {
                return t;
            }
        }
    }
}

/// Keeps each name independently with probability `p`.
pub fn random_subset(rng: &mut ChaCha8Rng, names: &[String], p: f64) -> BTreeSet<String> {
    names.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

fn shapes(n: usize, with_om: bool, memo: &mut Vec<Option<Vec<FiniteTerm>>>) -> Vec<FiniteTerm> {
    if let Some(v) = &memo[n] {
        return v.clone();
    }
    let mut out = Vec::new();
    if n == 1 {
        out.push(FiniteTerm::leaf("'@"));
        if with_om {
            out.push(FiniteTerm::leaf("om"));
        }
    } else {
        for c in shapes(n - 1, with_om, memo) {
            out.push(FiniteTerm::new("fg", vec![c]));
        }
        for l in 1..n - 1 {
            for a in shapes(l, with_om, memo) {
                for b in shapes(n - 1 - l, with_om, memo) {
                    out.push(FiniteTerm::new("cat", vec![a.clone(), b]));
                }
            }
        }
    }
    memo[n] = Some(out.clone());
    out
}

fn name_leaves(t: &FiniteTerm, next: &mut usize) -> FiniteTerm {
    if t.sym() == "'@" {
        let name = if *next < 26 {
            format!("'{}", (b'a' + *next as u8) as char)
        } else {
            format!("'n{next}")
        };
        *next += 1;
        return FiniteTerm::leaf(name);
    }
    FiniteTerm::new(
        t.sym(),
        t.children().iter().map(|c| name_leaves(c, next)).collect(),
    )
}

/// Every term with between 1 and `max_positions` positions over `cat`,
/// `fg`, quoted nodes (named `'a`, `'b`, ... in preorder) and, when
/// `with_om` is set, the empty constant `om`.
pub fn exhaustive_terms(max_positions: usize, with_om: bool) -> Vec<FiniteTerm> {
    let mut memo = vec![None; max_positions + 1];
    let mut out = Vec::new();
    for n in 1..=max_positions {
        for shape in shapes(n, with_om, &mut memo) {
            let mut next = 0;
            out.push(name_leaves(&shape, &mut next));
        }
    }
    out
}

/// A random structure over the vocabulary `leq`(2), `N0`(1), `N1`(1) with
/// `n` elements named `e0..`; mostly but not always reflexive `leq` and
/// mostly but not always partitioning marks, so both valid and invalid
/// encodings appear.
pub fn random_structure(rng: &mut ChaCha8Rng, n: usize) -> RelStructure {
    let names = (0..n).map(|i| format!("e{i}")).collect();
    let mut s = RelStructure::new(names);
    let mut leq = Vec::new();
    for i in 0..n {
        if rng.gen_bool(0.9) {
            leq.push(vec![i, i]);
        }
        for k in 0..n {
            if i != k && rng.gen_bool(0.3) {
                leq.push(vec![i, k]);
            }
        }
    }
    let mut n0 = Vec::new();
    let mut n1 = Vec::new();
    for i in 0..n {
        if rng.gen_bool(0.5) {
            n0.push(vec![i]);
        } else {
            n1.push(vec![i]);
        }
        if rng.gen_bool(0.1) {
            // Occasionally double-mark or unmark to exercise the partition
            // checks.
            if rng.gen_bool(0.5) {
                n0.push(vec![i]);
                n1.push(vec![i]);
            } else {
                n0.retain(|t| t[0] != i);
                n1.retain(|t| t[0] != i);
            }
        }
    }
    s.add_rel("leq", 2, leq).expect("in range");
    s.add_rel("N0", 1, n0).expect("in range");
    s.add_rel("N1", 1, n1).expect("in range");
    s
}

fn gen_atom(rng: &mut ChaCha8Rng, elems: &[String], sets: &[String]) -> MSOFormula {
    let mut choices: Vec<u8> = vec![0];
    if !elems.is_empty() {
        choices.extend([1, 2, 3, 4]);
        if !sets.is_empty() {
            choices.push(5);
        }
    }
    if !sets.is_empty() {
        choices.push(6);
    }
    let pick_e = |rng: &mut ChaCha8Rng| elems[rng.gen_range(0..elems.len())].clone();
    let pick_s = |rng: &mut ChaCha8Rng| sets[rng.gen_range(0..sets.len())].clone();
    match choices[rng.gen_range(0..choices.len())] {
        1 => MSOFormula::Atom("leq".into(), vec![pick_e(rng), pick_e(rng)]),
        2 => MSOFormula::Atom("N0".into(), vec![pick_e(rng)]),
        3 => MSOFormula::Atom("N1".into(), vec![pick_e(rng)]),
        4 => MSOFormula::Eq(pick_e(rng), pick_e(rng)),
        5 => MSOFormula::In(pick_e(rng), pick_s(rng)),
        6 => MSOFormula::Sub(pick_s(rng), pick_s(rng)),
        _ => {
            if rng.gen_bool(0.5) {
                MSOFormula::True
            } else {
                MSOFormula::False
            }
        }
    }
}

fn gen_formula(
    rng: &mut ChaCha8Rng,
    depth: usize,
    elems: &mut Vec<String>,
    sets: &mut Vec<String>,
    set_quota: &mut usize,
) -> MSOFormula {
    if depth == 0 {
        return gen_atom(rng, elems, sets);
    }
    match rng.gen_range(0..10) {
        0 | 1 => gen_atom(rng, elems, sets),
        2 => MSOFormula::And(vec![
            gen_formula(rng, depth - 1, elems, sets, set_quota),
            gen_formula(rng, depth - 1, elems, sets, set_quota),
        ]),
        3 => MSOFormula::Or(vec![
            gen_formula(rng, depth - 1, elems, sets, set_quota),
            gen_formula(rng, depth - 1, elems, sets, set_quota),
        ]),
        4 => MSOFormula::Not(Box::new(gen_formula(rng, depth - 1, elems, sets, set_quota))),
        5 => MSOFormula::Implies(
            Box::new(gen_formula(rng, depth - 1, elems, sets, set_quota)),
            Box::new(gen_formula(rng, depth - 1, elems, sets, set_quota)),
        ),
        6 => MSOFormula::Iff(
            Box::new(gen_formula(rng, depth - 1, elems, sets, set_quota)),
            Box::new(gen_formula(rng, depth - 1, elems, sets, set_quota)),
        ),
        k => {
            let set = k == 9 && *set_quota > 0;
            if set {
                *set_quota -= 1;
                let v = format!("X{}", sets.len());
                sets.push(v.clone());
                let body = gen_formula(rng, depth - 1, elems, sets, set_quota);
                sets.pop();
                if rng.gen_bool(0.5) {
                    MSOFormula::ExSet(v, Box::new(body))
                } else {
                    MSOFormula::AllSet(v, Box::new(body))
                }
            } else {
                let v = format!("x{}", elems.len());
                elems.push(v.clone());
                let body = gen_formula(rng, depth - 1, elems, sets, set_quota);
                elems.pop();
                if rng.gen_bool(0.5) {
                    MSOFormula::Ex(v, Box::new(body))
                } else {
                    MSOFormula::All(v, Box::new(body))
                }
            }
        }
    }
}

/// A random closed formula over `leq`/`N0`/`N1` with at most two set
/// quantifiers; every atom uses only quantified variables, so evaluation
/// never reports unbound variables.
pub fn random_closed_formula(rng: &mut ChaCha8Rng, depth: usize) -> MSOFormula {
    let mut quota = 2;
    gen_formula(rng, depth, &mut Vec::new(), &mut Vec::new(), &mut quota)
}
