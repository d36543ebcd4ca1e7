//! Which vacuum-superposition projectors a local party may measure.

use std::sync::Arc;

use loopphase::fock::{ModeDescriptor, ModeRegistry, Register, Species};
use loopphase::protocols::vacuum_projector;
use loopphase::superselection::{check_observable, RuleSet};

fn main() {
    let cases = [
        ("uncharged boson", Species::Boson),
        ("uncharged fermion", Species::Fermion { charge: 0 }),
        ("charged fermion", Species::Fermion { charge: 1 }),
    ];
    for (name, species) in cases {
        let reg = Arc::new(ModeRegistry::new(vec![ModeDescriptor::new(0, Register::Primary, "m", species)], 2).unwrap());
        // (|0> + e^{0.4i}|1>)/√2 on the single mode
        let proj = vacuum_projector(&reg, &[vec![0]], &[1.0], &[0.4]).unwrap();
        for (label, rules) in [("enforced", RuleSet::ALL), ("ignored", RuleSet::NONE)] {
            println!("{name:18} rules {label:8} -> {:?}", check_observable(&proj, rules));
        }
    }
}
