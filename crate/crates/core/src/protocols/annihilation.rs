//! Pair annihilation variant of the two-party protocol.

use std::collections::BTreeMap;

use crate::estimation::wrap_phase;
use crate::fock::{BasisState, QuantumState, Register};
use crate::gauge::{bipartite_loop, loop_phase};

use super::{
    branch_to, build_emission_state, two_party_layout, vacuum_projector_protocol, EmissionScenario, ExtractedPhase,
    ProtocolError, ProtocolResult,
};

/// Mode indices of one party in the annihilation layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnihilationModes {
    pub anti: usize,
    pub particle: usize,
    pub photons: [usize; 2],
}

fn layout(scenario: &EmissionScenario) -> Result<[AnnihilationModes; 2], ProtocolError> {
    let modes = two_party_layout(scenario)?;
    let (q0, q1) = (scenario.charge_of_source(0), scenario.charge_of_source(1));
    if q0 == 0 || q0 != -q1 {
        return Err(ProtocolError::InvalidScenario(format!(
            "annihilation needs opposite nonzero charges, got {q0} and {q1}"
        )));
    }
    let reg = &scenario.registry;
    let mut out = Vec::new();
    for p in 0..2 {
        let photons: Vec<usize> = reg
            .modes_of_party(p)
            .into_iter()
            .filter(|&m| reg.modes()[m].register == Register::Photon && !reg.modes()[m].species.is_fermion())
            .collect();
        if photons.len() != 2 {
            return Err(ProtocolError::InvalidScenario(format!("party {p} needs exactly two photon modes")));
        }
        out.push(AnnihilationModes { anti: modes[p][0], particle: modes[p][1], photons: [photons[0], photons[1]] });
    }
    Ok([out[0], out[1]])
}

/// Keeps the runs in which both particles meet at one party, replaces each
/// pair by a photon pair, and measures the photons with vacuum/pair
/// superposition projectors. The extracted phase is `arg(amp_1/amp_0)` of the
/// photon state; its gauge part is the loop of the two-party protocol taken
/// with the second source's charge.
pub fn annihilation_protocol(scenario: &EmissionScenario, settings: &[f64]) -> Result<ProtocolResult, ProtocolError> {
    let sites = layout(scenario)?;
    let reg = scenario.registry.clone();
    let psi = build_emission_state(scenario)?;
    let co_located = |b: &BasisState| {
        sites.iter().all(|s| b.0[s.anti] == b.0[s.particle])
    };
    let (kept, p) = psi.postselect(co_located)?;

    let mut photon_terms = Vec::new();
    for s in &sites {
        let mut pair = vec![0u8; reg.len()];
        pair[s.anti] = 1;
        pair[s.particle] = 1;
        let amp = kept.amplitude(&BasisState(pair));
        let mut photons = vec![0u8; reg.len()];
        photons[s.photons[0]] = 1;
        photons[s.photons[1]] = 1;
        photon_terms.push((BasisState(photons), amp));
    }
    let photon_state = QuantumState::from_amplitudes(reg.clone(), photon_terms)?.normalized();

    let photon_sites = [sites[0].photons.to_vec(), sites[1].photons.to_vec()];
    let (dists, value) = vacuum_projector_protocol(&photon_state, &photon_sites, scenario.rules, settings)?;

    let beta = |j, party| branch_to(scenario, j, party).beta;
    let mechanical = beta(0, 1) + beta(1, 1) - beta(0, 0) - beta(1, 0);
    let path = |j, party| &branch_to(scenario, j, party).path;
    let chain = bipartite_loop(path(0, 0), path(1, 0), path(1, 1), path(0, 1));
    let loop_value = loop_phase(&scenario.potential, &chain, scenario.charge_of_source(1))?;

    let measured: Vec<usize> = sites.iter().flat_map(|s| s.photons).collect();
    let distribution: BTreeMap<_, _> = dists[0].distribution.clone();
    Ok(ProtocolResult {
        postselection_probability: p,
        measured_modes: measured,
        distribution,
        settings: dists,
        phases: vec![ExtractedPhase {
            label: "delta_phi_pair".into(),
            value,
            predicted: wrap_phase(mechanical + loop_value),
            mechanical,
            loop_value: Some(loop_value),
            provenance: "mechanical + loop +γ(0,0) −γ(0,1) +γ(1,1) −γ(1,0) at the particle charge".into(),
        }],
    })
}
