//! Description schemes: finite data pinning down a structured tree up to
//! isomorphism, with extraction, unfolding, and describes-checking.

use otree::corpus;
use otree::scheme::{describes, extract_scheme, extract_scheme_regular, unfold_scheme};
use otree::value::{approx_val, val_direct};

fn main() {
    // A scheme whose single word is "tail letter then star" unfolds to a
    // reversed chain: each line is a singleton hanging below the previous.
    let rev = corpus::reversed_chain_scheme();
    let u = unfold_scheme(&rev, 5, 5).unwrap();
    println!("reversed chain at depth 5 (complete={}):", u.complete);
    println!("  cover {:?}", u.soa.forest().cover_pairs());

    // The identity scheme of a finite value: one label per line.
    let t = corpus::six_node_tree_term();
    let j = val_direct(&t).unwrap();
    let (sch, _) = extract_scheme(&j).unwrap();
    println!("\nidentity scheme of {t}:");
    println!("  labels {:?}", sch.d_labels());
    println!("  describes its own value: {}", describes(&j, &sch));
    let back = unfold_scheme(&sch, 4, 8).unwrap();
    println!("  unfolds back to {} nodes", back.soa.forest().len());

    // Regular extraction reads the scheme off an equation system.
    let sys = corpus::pendant_forest_system();
    let sch = extract_scheme_regular(&sys).unwrap();
    println!("\nscheme of the pendant system:");
    println!("  cut letters  {:?}", sch.q_cut());
    println!("  tail letters {:?}", sch.q_tail());
    let u = unfold_scheme(&sch, 3, 3).unwrap();
    println!("  depth-3 window has {} nodes", u.soa.forest().len());
    let a = approx_val(&sys, 3).unwrap();
    println!("  depth-3 approximant has {} nodes", a.forest().len());

    // An infinite scheme can be truncated to a finite one.
    let inf = corpus::branching_scheme();
    let fin = inf.truncate_omega(2);
    println!("\nbranching scheme truncated at 2:");
    let u = unfold_scheme(&fin, 2, 12).unwrap();
    println!("  {} nodes, complete={}", u.soa.forest().len(), u.complete);
}
