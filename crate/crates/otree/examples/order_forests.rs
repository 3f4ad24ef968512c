//! Order-theoretic forests: partial orders whose up-sets are chains.

use std::collections::BTreeSet;

use otree::oforest::OForest;

fn main() {
    let f = OForest::from_pairs(
        ["a1", "a2", "b1", "c1", "d1", "e1"],
        &[("a1", "a2"), ("b1", "a2"), ("c1", "b1"), ("d1", "a2"), ("e1", "d1")],
    )
    .unwrap();
    println!("nodes           {:?}", f.nodes());
    println!("is otree        {}", f.is_otree());
    println!("is join tree    {}", f.is_jointree());
    let (c1, e1) = (f.node_index("c1").unwrap(), f.node_index("e1").unwrap());
    println!(
        "join(c1,e1)     {:?}",
        f.join(c1, e1).map(|i| f.name(i))
    );

    // Up-sets must be chains: a diamond is rejected.
    let bad = OForest::from_pairs(
        ["x", "l", "r", "t"],
        &[("x", "l"), ("x", "r"), ("l", "t"), ("r", "t")],
    );
    println!("\ndiamond rejected: {}", bad.unwrap_err());

    let two = OForest::from_pairs(
        ["p", "q", "r"],
        &[("p", "q")],
    )
    .unwrap();
    println!("\ncomponents of a 2-part forest:");
    for c in two.components() {
        println!("  {:?}", c.nodes());
    }

    let keep: BTreeSet<String> = ["a1", "b1", "c1"].map(String::from).into();
    let sub = f.induced(&keep).unwrap();
    println!("\ninduced on {{a1,b1,c1}}: cover {:?}", sub.cover_pairs());
    println!("\nDOT output:\n{}", sub.to_dot());
}
