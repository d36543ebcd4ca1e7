//! Three sources, three parties, Fourier mixers at each party. Prints the
//! outcome distribution and, for every interfering pair of assignments, the
//! phase from the state next to the sum of its bracket loops.

use loopphase::protocols::general_outcome_distribution;
use loopphase::scenario::{build_scenario, load_scenario};
use loopphase::superselection::RuleSet;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/general_three_party.scn");
    let built = build_scenario(&load_scenario(path).unwrap(), RuleSet::ALL).unwrap();
    let out = general_outcome_distribution(&built.scenario).unwrap();

    println!("kept {:.6}", out.result.postselection_probability);
    let mut dist: Vec<_> = out.result.distribution.iter().collect();
    dist.sort_by(|a, b| b.1.total_cmp(a.1));
    for (k, p) in dist.iter().take(6) {
        println!("  {k:?}  {p:.6}");
    }
    println!("{} interference terms", out.interference.len());
    for t in &out.interference {
        println!(
            "  {:?} vs {:?}: state {:+.6}  loops {:+.6}  ({} brackets)",
            t.x,
            t.x_prime,
            t.state_phase,
            t.loop_phase.unwrap_or(f64::NAN),
            t.brackets.len()
        );
    }
}
