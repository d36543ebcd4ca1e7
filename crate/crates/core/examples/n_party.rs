use loopphase::protocols::n_party_single_particle;

fn main() {
    let phases = [0.0, 0.5, -1.2, 2.0];
    let r = n_party_single_particle(&phases).unwrap();
    println!("{} parties, acceptance {} = {:.4}", phases.len(), r.exact_acceptance, r.result.postselection_probability);
    for p in &r.result.phases {
        println!("{:10} {:+.6}", p.label, p.value);
    }
}
