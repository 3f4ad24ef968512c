//! Isomorphism checks at three levels: finite structured forests (exact),
//! plain order trees (exact), and description schemes (sound three-valued
//! comparison).

use std::collections::{BTreeMap, BTreeSet};

use otree::arrangement::{FiniteArrangement, LabelledSet};
use otree::corpus;
use otree::oforest::OForest;
use otree::scheme::{scheme_equiv, DescriptionScheme, WForm};
use otree::system::Count;
use otree::term::{parse_term, Signature};
use otree::value::{otree_iso, soa_iso, val_direct};

fn main() {
    let sig = Signature::soa();
    let a = val_direct(&parse_term("'a cat ('b cat 'c)", &sig).unwrap()).unwrap();
    let b = val_direct(&parse_term("('x cat 'y) cat 'z", &sig).unwrap()).unwrap();
    let c = val_direct(&parse_term("'x cat fg('y cat 'z)", &sig).unwrap()).unwrap();
    println!("two 3-chains:        {}", soa_iso(&a, &b));
    println!("chain vs pendant:    {}", soa_iso(&a, &c));

    let f = OForest::from_pairs(["p", "q", "r"], &[("p", "r"), ("q", "r")]).unwrap();
    let g = OForest::from_pairs(["1", "2", "3"], &[("3", "2"), ("1", "2")]).unwrap();
    println!("relabelled vees:     {}", otree_iso(&f, &g));

    // Schemes compare by label bijection when possible, else by bounded
    // unfolding; renamings are iso, different shapes are not.
    let rev = corpus::reversed_chain_scheme();
    // The same scheme built with different letter names: line "d" becomes
    // "line", tail letter "q" becomes "tick".
    let renamed = {
        let m = BTreeMap::from([(
            "tick".to_string(),
            LabelledSet::from_counts([("line", Count::Finite(1))]),
        )]);
        let w = BTreeMap::from([(
            "line".to_string(),
            WForm::Finite(FiniteArrangement::from_labels(["tick", "*"])),
        )]);
        DescriptionScheme::new(
            "line",
            BTreeSet::new(),
            BTreeSet::from(["tick".to_string()]),
            m,
            w,
        )
        .unwrap()
    };
    println!("renamed scheme:      {}", scheme_equiv(&rev, &renamed));
    println!("chain vs singleton:  {}", scheme_equiv(&rev, &corpus::singleton_scheme()));
}
