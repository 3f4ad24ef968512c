//! Term values: the structured forest denoted by a finite term, computed
//! by two independent routes, with representative positions and node
//! erasure.

use std::collections::BTreeSet;

use otree::corpus;
use otree::value::{erase_nodes, rep_cut, rep_line, soa_iso, val_algebraic, val_direct};

fn main() {
    let t = corpus::six_node_tree_term();
    println!("term            {t}");
    let j = val_direct(&t).unwrap();
    assert_eq!(j, val_algebraic(&t).unwrap());
    println!("order (cover)   {:?}", j.forest().cover_pairs());
    for li in 0..j.line_count() {
        println!(
            "  line {:?} depth {} {}",
            j.line_names(li),
            j.line_depth(li),
            if j.axis() == Some(li) { "(axis)" } else { "" }
        );
    }
    println!("rep of axis     {:?}", rep_line(&t, "a").unwrap().to_string());
    println!("rep of {{c,d}}    {}", rep_line(&t, "c").unwrap());

    let t = corpus::five_line_axis_term();
    println!("\nterm            {t}");
    let j = val_direct(&t).unwrap();
    println!("axis            {:?}", j.line_names(j.axis().unwrap()));
    for cut in j.cuts(j.axis().unwrap()) {
        let names = j.line_names(j.axis().unwrap());
        let (l, r) = names.split_at(cut.left_size);
        let def: Vec<&str> = j.definers(cut).iter().map(|&i| j.forest().name(i)).collect();
        println!(
            "cut {l:?}|{r:?}  definers {def:?}  rep {}",
            rep_cut(&t, l, r).unwrap()
        );
    }

    let keep: BTreeSet<String> = ["a", "c", "e"].map(String::from).into();
    let small = val_direct(&erase_nodes(&t, &keep)).unwrap();
    let induced = j.induced(&keep).unwrap();
    println!(
        "\nerase vs induce on {{a,c,e}} agree: {}",
        soa_iso(&small, &induced)
    );
    println!("3-chain on the axis: {:?}", small.forest().cover_pairs());
}
