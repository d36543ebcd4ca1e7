//! Reconstructs amplitudes and relative phases of a two-party fermionic
//! state from local interference with reference copies, exactly and from
//! sampled counts.

use loopphase::estimation::circular_distance;
use loopphase::protocols::{tomography_run, Shots, TomographyTarget};

fn main() {
    let target = TomographyTarget {
        modes_per_party: vec![2, 2],
        components: vec![
            (vec![1, 0, 1, 0], 0.6, 0.0),
            (vec![1, 0, 0, 1], 0.5, 0.7),
            (vec![0, 1, 1, 0], 0.4, -1.2),
            (vec![0, 1, 0, 1], 0.3, 2.0),
            (vec![1, 1, 0, 0], 0.2, 0.4),
            (vec![0, 0, 1, 1], 0.1f64.sqrt(), -0.3),
        ],
    };

    for shots in [Shots::Exact, Shots::Finite(100_000)] {
        let r = tomography_run(&target, shots, 11).unwrap();
        // phases are fixed relative to the first support element
        let anchor = target.components.iter().find(|c| c.0 == r.support[0]).unwrap().2;
        println!("{shots:?}: {} settings, phases relative to {:?}", r.settings, r.support[0]);
        for (pattern, amp, phase) in &target.components {
            let Some(i) = r.support.iter().position(|s| s == pattern) else {
                println!("  {pattern:?} missed");
                continue;
            };
            let truth = phase - anchor;
            println!(
                "  {pattern:?}  λ {:.4} (true {amp:.4})  φ {:+.4} (true {truth:+.4}, off by {:.1e})",
                r.amplitudes[i],
                r.phases[i],
                circular_distance(r.phases[i], truth)
            );
        }
    }
}
