//! Parties on a ring around a solenoid. The flux is switched on after the
//! first particle has already arrived; the measured phase still equals
//! qΦθ/2π, whatever the ramp looks like.

use std::f64::consts::PI;

use loopphase::scenario::{ab_demo, Ramp};

fn main() {
    let flux = 2.0;
    for theta in [PI / 6.0, PI / 2.0, PI, 3.0 * PI / 2.0] {
        for ramp in [Ramp::Linear, Ramp::Steps] {
            let report = ab_demo(theta, flux, ramp, 1).unwrap();
            let d = &report.phases[0];
            println!(
                "theta {theta:.4}  {ramp:?}\tdelta_phi {:+.9}  qΦθ/2π {:+.9}",
                d.value,
                flux * theta / (2.0 * PI)
            );
        }
    }
}
