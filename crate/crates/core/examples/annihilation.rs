//! A particle and its antiparticle take the same routes as the identical
//! particles of the two-party protocol. Runs where they meet turn into photon
//! pairs, and vacuum/pair projectors on the photons read the same loop phase.

use loopphase::gauge::{FluxSchedule, GaugePotential};
use loopphase::protocols::{
    annihilation_protocol, annihilation_scenario, two_party_phase_protocol, two_party_scenario, Statistics,
    TwoPartyGeometry,
};

fn main() {
    let geom = TwoPartyGeometry::straight(GaugePotential::Solenoid { schedule: FluxSchedule::constant(1.1) });
    let betas = [[0.0; 2]; 2];

    let pair = two_party_phase_protocol(&two_party_scenario(&geom, Statistics::Fermion, 1, betas).unwrap(), &[]).unwrap();
    let ann = annihilation_protocol(&annihilation_scenario(&geom, 1, betas).unwrap(), &[]).unwrap();

    println!("identical particles: kept {:.2}, delta_phi {:+.9}", pair.postselection_probability, pair.phases[0].value);
    println!("annihilation:        kept {:.2}, delta_phi {:+.9}", ann.postselection_probability, ann.phases[0].value);
    println!("photon statistics at setting 0:");
    for (k, p) in &ann.distribution {
        println!("  signs {k:?}  {p:.4}");
    }
}
