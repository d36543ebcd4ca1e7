//! Line phases along open worldlines change under a gauge transformation;
//! the phase around a closed chain does not.

use std::f64::consts::PI;
use std::sync::Arc;

use loopphase::gauge::{
    gauge_transformed, line_phase, loop_phase, FluxSchedule, GaugePotential, Monomial, OrientedSegment, PathBuilder,
    Polynomial, ScalarField, SpacetimeEvent,
};

fn main() {
    let flux = 0.8;
    let field = GaugePotential::Solenoid { schedule: FluxSchedule::constant(flux) };
    let start = SpacetimeEvent::new(0.0, 1.0, 0.0, 0.0);

    // counter-clockwise quarter turn, then back clockwise along a wider arc
    let upper = PathBuilder::start(start).sweep(1.0, PI / 2.0, 64).build().unwrap();
    let lower = PathBuilder::start(start).to(SpacetimeEvent::new(0.3, 2.0, 0.0, 0.0)).sweep(0.7, PI / 2.0, 64).to(
        SpacetimeEvent::new(1.0, 0.0, 1.0, 0.0),
    );
    let lower = lower.build().unwrap();
    let chain = [OrientedSegment::forward(upper.clone()), OrientedSegment::backward(lower.clone())];

    let chi = Polynomial::new(vec![
        Monomial { coeff: 0.7, powers: [1, 1, 0, 0] },
        Monomial { coeff: -0.2, powers: [0, 0, 3, 0] },
    ]);
    let moved = gauge_transformed(&field, Arc::new(chi.clone())).unwrap();

    for (name, pot) in [("original", &field), ("transformed", &moved)] {
        println!(
            "{name:12} upper {:+.6}  lower {:+.6}  loop {:+.6}",
            line_phase(pot, &upper, 1).unwrap(),
            line_phase(pot, &lower, 1).unwrap(),
            loop_phase(pot, &chain, 1).unwrap()
        );
    }
    println!("Δχ between the endpoints {:+.6}", chi.value(&upper.end()) - chi.value(&upper.start()));
    println!("the two arcs enclose no flux, so the loop vanishes");
}
