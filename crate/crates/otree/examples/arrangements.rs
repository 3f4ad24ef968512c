//! Arrangements: labelled linear orders, their concatenation, censuses,
//! and bounded windows into regular (infinite) arrangements.

use std::collections::BTreeMap;

use otree::arrangement::{
    arr_concat, arr_value, equivalence, finite_arr_iso, set_of_finite, term_to_arrangement,
    RegularArrangement,
};
use otree::corpus;
use otree::system::EquationSystem;
use otree::term::{parse_term, Signature};

/// Inorder arrangements of word systems carry marker letters for the
/// internal concatenation nodes; keep only the named letters.
fn word_of(sys: &EquationSystem) -> RegularArrangement {
    let arr = term_to_arrangement(sys).unwrap();
    let keep: BTreeMap<String, String> = arr
        .letters()
        .into_iter()
        .filter(|l| !l.contains('#'))
        .map(|l| (l.clone(), l))
        .collect();
    arr.erase_relabel(&keep)
}

fn main() {
    let sig = Signature::arrangement(["a", "b"]);
    let u = arr_value(&parse_term("a cat (b cat a)", &sig).unwrap()).unwrap();
    let v = arr_value(&parse_term("(a cat b) cat a", &sig).unwrap()).unwrap();
    println!("u               {:?}", u.labels());
    println!("v               {:?}", v.labels());
    println!("u iso v         {}", finite_arr_iso(&u, &v));
    let uv = arr_concat(&u, &v);
    println!("u.v             {:?}", uv.labels());
    println!("census of u.v   {}", set_of_finite(&uv));

    let alt = word_of(&corpus::alternating_word_system());
    println!("\nalternating word, first windows:");
    for b in 1..=4 {
        println!("  window {b}: {:?}", alt.bounded_window(b).labels());
    }
    println!("letters         {:?}", alt.letters());
    println!("census          {}", alt.set_of());

    let dense = word_of(&corpus::rational_word_system());
    println!("\ndense word window 2: {:?}", dense.bounded_window(2).labels());
    println!(
        "dense vs alternating: {:?}",
        equivalence(&dense, &alt, 6)
    );
    println!("dense vs dense:       {:?}", equivalence(&dense, &dense, 6));
}
