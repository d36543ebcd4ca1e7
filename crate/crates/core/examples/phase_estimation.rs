//! Maximum-likelihood Δφ from finite counts of the two-party protocol, at a
//! few shot budgets.

use std::f64::consts::PI;

use loopphase::estimation::{circular_distance, mle_delta_phi, sample_settings};
use loopphase::gauge::{FluxSchedule, GaugePotential};
use loopphase::protocols::{two_party_model, two_party_phase_protocol, two_party_scenario, Statistics, TwoPartyGeometry};

fn main() {
    let geom = TwoPartyGeometry::straight(GaugePotential::Solenoid { schedule: FluxSchedule::constant(0.4) });
    let scenario = two_party_scenario(&geom, Statistics::Fermion, 1, [[0.2, 0.0], [0.0, 0.5]]).unwrap();
    let settings = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
    let result = two_party_phase_protocol(&scenario, &settings).unwrap();
    let truth = result.phases[0].value;
    println!("exact Δφ {truth:+.6}");

    let dists: Vec<_> = result.settings.iter().map(|s| (s.setting, s.distribution.clone())).collect();
    for shots in [100, 1_000, 10_000, 100_000] {
        let counts = sample_settings(&dists, shots, 5);
        let est = mle_delta_phi(&counts, &two_party_model).unwrap();
        println!(
            "{shots:>7} shots/setting  Δφ {:+.5} ± {:.5}  error {:.5}",
            est.value,
            est.standard_error,
            circular_distance(est.value, truth)
        );
    }
}
