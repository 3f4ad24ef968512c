//! Finite terms, regular equation systems, and the automata they induce.

use otree::corpus;
use otree::term::{parse_term, Signature};
use otree::Position;

fn main() {
    let sig = Signature::soa();
    let t = parse_term("'a cat (fg('x) cat 'b)", &sig).unwrap();
    println!("term            {t}");
    println!("positions       {}", t.size());
    for (p, sym) in t.positions() {
        println!("  {:<5} {sym}", p.to_string());
    }

    let sys = corpus::rational_word_system();
    println!("\nsystem\n{sys}");
    let auto = sys.to_automaton();
    println!("states          {}", auto.len());

    let dom = auto.domain_language();
    let occ = auto.occurrences_language("a");
    println!("\nposition        in domain   labelled a");
    for w in ["", "1", "2", "21", "22", "121", "221", "212"] {
        let p: Position = w.parse().unwrap();
        println!(
            "  {:<13} {:<11} {}",
            if w.is_empty() { "(root)" } else { w },
            dom.accepts(&p),
            occ.accepts(&p)
        );
    }
    println!("\na-positions up to length 4:");
    for p in occ.enumerate(4) {
        println!("  {p}");
    }

    let cut = auto.truncate(3, "om").unwrap();
    println!("\ndepth-3 truncation: {cut}");
}
