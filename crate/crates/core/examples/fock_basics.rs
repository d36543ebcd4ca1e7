//! Two particles meet at a 50/50 beam splitter. Bosons bunch, fermions
//! antibunch, and swapping the order of two fermionic creations flips the
//! sign of the state.

use std::sync::Arc;

use loopphase::fock::{beam_splitter, Ladder, ModeDescriptor, ModeRegistry, QuantumState, Register, Species};

fn two_modes(species: Species) -> Arc<ModeRegistry> {
    let modes = ["a", "b"].map(|l| ModeDescriptor::new(0, Register::Primary, l, species)).to_vec();
    Arc::new(ModeRegistry::new(modes, 2).unwrap())
}

fn main() {
    for (name, species) in [("bosons", Species::Boson), ("fermions", Species::Fermion { charge: 0 })] {
        let reg = two_modes(species);
        let one_each = QuantumState::vacuum(reg.clone())
            .apply_ladder(1, Ladder::Create)
            .unwrap()
            .apply_ladder(0, Ladder::Create)
            .unwrap();
        let out = one_each.apply_linear_mode_transform(&[0, 1], &beam_splitter(0.0)).unwrap();
        println!("{name} after the beam splitter:");
        for (pattern, p) in out.measure_occupation(&[0, 1]).probabilities() {
            println!("  {pattern:?}  {p:.3}");
        }
    }

    let reg = two_modes(Species::Fermion { charge: 0 });
    let vac = QuantumState::vacuum(reg);
    let ab = vac.apply_ladder(1, Ladder::Create).unwrap().apply_ladder(0, Ladder::Create).unwrap();
    let ba = vac.apply_ladder(0, Ladder::Create).unwrap().apply_ladder(1, Ladder::Create).unwrap();
    println!("<a†b†|b†a†> = {:.1}", ab.inner_product(&ba).unwrap());
}
