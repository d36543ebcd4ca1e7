//! Any phase difference between two source-to-party assignments splits into
//! closed loops through two sources and two parties.

use loopphase::loopdecomp::{decompose_phase, delta_phi_formal, Assignment};

fn show(x: Vec<usize>, xp: Vec<usize>) {
    let (x, xp) = (Assignment(x), Assignment(xp));
    let d = decompose_phase(&x, &xp).unwrap();
    println!("x = {:?}, x' = {:?}, matching permutation {:?}", x.0, xp.0, d.permutation.0);
    for b in &d.brackets {
        let terms: Vec<String> = b
            .terms()
            .iter()
            .map(|(s, k)| format!("{}φ({},{})", if *k > 0 { "+" } else { "-" }, s.party, s.source))
            .collect();
        println!("  [{}]", terms.join(" "));
    }
    assert_eq!(d.formal_sum, delta_phi_formal(&x, &xp).unwrap());
}

fn main() {
    // three sources passed around three parties: two brackets
    show(vec![0, 1, 2], vec![1, 2, 0]);
    // a swap between two parties: one bracket
    show(vec![0, 1], vec![1, 0]);
    // repeated parties; the fixed points cost nothing
    show(vec![0, 0, 1, 2, 2], vec![2, 0, 1, 0, 2]);
}
