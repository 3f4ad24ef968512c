//! Structurings: partitioning a forest into convex chains (lines), with
//! depths, covering, cuts, tails, and the recomposition identity.

use otree::corpus;

fn main() {
    let s = corpus::two_level_tree();
    println!("lines and depths:");
    for li in 0..s.line_count() {
        println!(
            "  line {li} {:?} depth {} {}",
            s.line_names(li),
            s.line_depth(li),
            if s.axis() == Some(li) { "(axis)" } else { "" }
        );
    }

    println!("\ncovering relation:");
    for lower in 0..s.line_count() {
        for upper in 0..s.line_count() {
            if s.covers(lower, upper) {
                println!("  {:?} is covered by {:?}", s.line_names(lower), s.line_names(upper));
            }
        }
    }

    println!("\ncuts of the axis:");
    for cut in s.cuts(0) {
        let names: Vec<&str> = s
            .definers(cut)
            .iter()
            .map(|&i| s.forest().name(i))
            .collect();
        println!("  {} splits after {} node(s); definers {names:?}", cut.key(), cut.left_size);
        let def = s.def_of(cut);
        println!("  hanging forest has {} components", def.forest().components().len());
    }

    for li in 0..s.line_count() {
        let tail: Vec<&str> = s.tail_nodes(li).iter().map(|&i| s.forest().name(i)).collect();
        if !tail.is_empty() {
            println!("\ntail of line {li}: {tail:?}");
        }
    }

    println!("\nextended words (cut and tail symbols inserted):");
    for li in 0..s.line_count() {
        println!("  line {li}: {}", s.u_plus(li));
    }

    // Each line's hanging tree equals its recomposition from the extended
    // word, the cut definitions, and the tail.
    for li in 0..s.line_count() {
        assert_eq!(s.recompose(li).unwrap(), s.down(li));
    }
    println!("\nrecomposition identity holds on every line");
}
