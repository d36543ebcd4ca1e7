//! Two sources each send one particle toward two parties. Keeping the runs
//! with one particle per party and interfering locally reveals the phase
//! difference, here set by the mechanical branch phases.

use std::f64::consts::PI;

use loopphase::gauge::GaugePotential;
use loopphase::protocols::{two_party_phase_protocol, two_party_scenario, Statistics, TwoPartyGeometry};

fn main() {
    let geom = TwoPartyGeometry::straight(GaugePotential::Zero);
    // betas[party][source]
    let betas = [[0.0, 0.0], [0.0, PI / 3.0]];
    for (stats, charge) in [(Statistics::Fermion, 1), (Statistics::Boson, 0)] {
        let scn = two_party_scenario(&geom, stats, charge, betas).unwrap();
        let r = two_party_phase_protocol(&scn, &[0.0, PI / 2.0]).unwrap();
        println!("{stats:?}: kept {:.2} of the runs", r.postselection_probability);
        for s in &r.settings {
            println!("  alpha = {:.3}", s.setting);
            for (pattern, p) in &s.distribution {
                println!("    {pattern:?}  {p:.4}");
            }
        }
        let d = &r.phases[0];
        println!("  delta_phi = {:.6} (expected {:.6})", d.value, d.predicted);
    }
}
