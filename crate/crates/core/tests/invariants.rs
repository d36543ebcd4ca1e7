use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use loopphase::estimation::circular_distance;
use loopphase::fock::{beam_splitter, BasisState, ModeDescriptor, ModeRegistry, QuantumState, Register, Species};
use loopphase::gauge::{
    gauge_transformed, line_phase, loop_phase, FluxSchedule, GaugePotential, OrientedSegment, PathBuilder, Polynomial,
    ScalarField, SpacetimeEvent, SpacetimePath,
};
use loopphase::protocols::{two_party_phase_protocol, two_party_scenario, Statistics, TwoPartyGeometry};

fn three_modes(fermion: bool) -> Arc<ModeRegistry> {
    let species = if fermion { Species::Fermion { charge: 1 } } else { Species::Boson };
    let modes = (0..3).map(|j| ModeDescriptor::new(0, Register::Primary, format!("m{j}"), species)).collect();
    Arc::new(ModeRegistry::new(modes, 2).unwrap())
}

fn basis_with(n: u8, fermion: bool) -> Vec<BasisState> {
    let cap = if fermion { 1 } else { n };
    let mut out = Vec::new();
    for a in 0..=cap {
        for b in 0..=cap {
            for c in 0..=cap {
                if a + b + c == n {
                    out.push(BasisState(vec![a, b, c]));
                }
            }
        }
    }
    out
}

/// Two arcs from (1,0) to (0,1): the short way round and a detour outside
/// the unit circle, so the chain does not wind around the origin.
fn lens(sweep: f64) -> (SpacetimePath, SpacetimePath) {
    let start = SpacetimeEvent::new(0.0, 1.0, 0.0, 0.0);
    let a = PathBuilder::start(start).sweep(1.0, sweep, 48).build().unwrap();
    let end = a.end();
    let b = PathBuilder::start(start)
        .to(SpacetimeEvent::new(0.3, 2.0, 0.0, 0.0))
        .sweep(0.7, sweep, 48)
        .to(end)
        .build()
        .unwrap();
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mode_transforms_preserve_norm(
        fermion in any::<bool>(),
        n in 1u8..=2,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
        angles in prop::collection::vec(-3.2f64..3.2, 3),
    ) {
        let reg = three_modes(fermion);
        let basis = basis_with(n, fermion);
        let terms = basis.into_iter().zip(raw).map(|(b, (re, im))| (b, Complex64::new(re, im)));
        let psi = QuantumState::from_amplitudes(reg, terms).unwrap();
        prop_assume!(psi.norm_sqr() > 1e-6);
        let psi = psi.normalized();
        let out = psi
            .apply_linear_mode_transform(&[0, 1], &beam_splitter(angles[0]))
            .and_then(|s| s.apply_linear_mode_transform(&[1, 2], &beam_splitter(angles[1])))
            .and_then(|s| s.apply_linear_mode_transform(&[2, 0], &beam_splitter(angles[2])))
            .unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12, "norm {}", out.norm_sqr());
    }

    #[test]
    fn closed_chains_ignore_gauge_transformations(seed in any::<u64>(), flux in -3.0f64..3.0, sweep in 0.3f64..2.5, q in -2i32..=2) {
        let field = GaugePotential::Solenoid { schedule: FluxSchedule::constant(flux) };
        let chi = Polynomial::random(&mut ChaCha8Rng::seed_from_u64(seed), 6, 3);
        let moved = gauge_transformed(&field, Arc::new(chi)).unwrap();
        let (a, b) = lens(sweep);
        let chain = [OrientedSegment::forward(a), OrientedSegment::backward(b)];
        let before = loop_phase(&field, &chain, q).unwrap();
        let after = loop_phase(&moved, &chain, q).unwrap();
        prop_assert!((before - after).abs() < 1e-8, "{before} vs {after}");
    }

    #[test]
    fn open_paths_shift_by_charge_times_delta_chi(seed in any::<u64>(), sweep in 0.3f64..2.5, q in -2i32..=2) {
        let chi = Polynomial::random(&mut ChaCha8Rng::seed_from_u64(seed), 6, 3);
        let field = GaugePotential::Solenoid { schedule: FluxSchedule::constant(0.5) };
        let moved = gauge_transformed(&field, Arc::new(chi.clone())).unwrap();
        let (a, _) = lens(sweep);
        let shift = line_phase(&moved, &a, q).unwrap() - line_phase(&field, &a, q).unwrap();
        let expected = q as f64 * (chi.value(&a.end()) - chi.value(&a.start()));
        prop_assert!((shift - expected).abs() < 1e-8 * (1.0 + expected.abs()), "{shift} vs {expected}");
    }

    #[test]
    fn two_party_phase_is_mechanical_plus_loop(
        betas in prop::array::uniform2(prop::array::uniform2(-3.0f64..3.0)),
        flux in -3.0f64..3.0,
        q in -2i32..=2,
    ) {
        let geom = TwoPartyGeometry::straight(GaugePotential::Solenoid { schedule: FluxSchedule::constant(flux) });
        let r = two_party_phase_protocol(&two_party_scenario(&geom, Statistics::Fermion, q, betas).unwrap(), &[]).unwrap();
        let p = &r.phases[0];
        prop_assert!(circular_distance(p.value, p.predicted) < 1e-9, "{} vs {}", p.value, p.predicted);
    }

    #[test]
    fn statistics_do_not_change_the_neutral_phase(betas in prop::array::uniform2(prop::array::uniform2(-3.0f64..3.0))) {
        let geom = TwoPartyGeometry::straight(GaugePotential::Zero);
        let run = |s| two_party_phase_protocol(&two_party_scenario(&geom, s, 0, betas).unwrap(), &[]).unwrap();
        let (f, b) = (run(Statistics::Fermion), run(Statistics::Boson));
        prop_assert!(circular_distance(f.phases[0].value, b.phases[0].value) < 1e-9);
        prop_assert!((f.postselection_probability - b.postselection_probability).abs() < 1e-12);
    }
}
