//! Outcome distribution of `d` sources and `N` parties under local linear
//! optics, and the loop content of its interference terms.

use std::collections::{BTreeMap, HashMap};

use crate::estimation::wrap_phase;
use crate::fock::BasisState;
use crate::gauge::SpacetimePath;
use crate::loopdecomp::{bracket_phase, decompose_phase, Assignment, Bracket, LoopError, PhaseSymbol};

use super::{build_emission_state, postselection_predicate, EmissionScenario, ProtocolError, ProtocolResult};

/// Interference between emission components `x` and `x′`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InterferenceTerm {
    /// Party of every source in each component.
    pub x: Vec<usize>,
    pub x_prime: Vec<usize>,
    /// `arg(amp_x) − arg(amp_x′)` minus the mechanical difference.
    pub state_phase: f64,
    /// `Σ_j φ(n_j, j) − φ(n′_j, j)` from the branch line phases.
    pub direct_phase: f64,
    /// Sum of bracket loops; absent when the sources carry different charges
    /// or a bracket runs along a path no branch provides.
    pub loop_phase: Option<f64>,
    pub brackets: Vec<Bracket>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralResult {
    pub result: ProtocolResult,
    pub interference: Vec<InterferenceTerm>,
}

/// Applies the scenario's local operations, postselects, and measures the
/// occupation of the measured modes. Interference terms are listed for every
/// pair of emission components with equal per-party counts that pass the
/// postselection (judged on the emitted state), when each mode is
/// fed by at most one source and each source sends at most one branch to a
/// party.
pub fn general_outcome_distribution(scenario: &EmissionScenario) -> Result<GeneralResult, ProtocolError> {
    let reg = scenario.registry.clone();
    let psi = build_emission_state(scenario)?;

    let mut state = psi.clone();
    for op in &scenario.local_ops {
        for &m in &op.modes {
            if reg.mode(m)?.party != op.party {
                return Err(ProtocolError::InvalidScenario(format!(
                    "local operation of party {} touches mode {m} of party {}",
                    op.party,
                    reg.modes()[m].party
                )));
            }
        }
        state = state.apply_linear_mode_transform(&op.modes, &op.matrix)?;
    }
    let measured = scenario.measured_modes();
    let (kept, p) = state.postselect(postselection_predicate(&reg, scenario.measurement.postselection, &measured))?;
    let distribution = kept.measure_occupation(&measured).probabilities();

    let accept = postselection_predicate(&reg, scenario.measurement.postselection, &measured);
    let interference = interference_terms(scenario, &psi, &accept)?;
    Ok(GeneralResult {
        result: ProtocolResult {
            postselection_probability: p,
            measured_modes: measured,
            distribution: distribution.clone(),
            settings: Vec::new(),
            phases: Vec::new(),
        },
        interference,
    })
}

fn interference_terms(
    scenario: &EmissionScenario,
    psi: &crate::fock::QuantumState,
    accept: &dyn Fn(&BasisState) -> bool,
) -> Result<Vec<InterferenceTerm>, ProtocolError> {
    let reg = &scenario.registry;
    let d = scenario.sources.len();
    // mode → (source, branch)
    let mut feeder: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut paths: BTreeMap<PhaseSymbol, SpacetimePath> = BTreeMap::new();
    for (j, s) in scenario.sources.iter().enumerate() {
        for (k, b) in s.branches.iter().enumerate() {
            if feeder.insert(b.target, (j, k)).is_some() {
                return Ok(Vec::new());
            }
            let sym = PhaseSymbol { party: reg.modes()[b.target].party, source: j };
            if paths.insert(sym, b.path.clone()).is_some() {
                return Ok(Vec::new());
            }
        }
    }
    let gauge = scenario.gauge_phases()?;
    let charges: Vec<i32> = (0..d).map(|j| scenario.charge_of_source(j)).collect();
    let uniform_charge = charges.iter().all(|&q| q == charges[0]);

    let components: Vec<(Vec<usize>, Vec<usize>, f64, f64)> = psi
        .amplitudes()
        .iter()
        .filter(|(b, _)| accept(b))
        .filter_map(|(b, amp)| {
            let branches = branches_of(b, &feeder, d)?;
            let parties: Vec<usize> =
                (0..d).map(|j| reg.modes()[scenario.sources[j].branches[branches[j]].target].party).collect();
            let mech: f64 = (0..d).map(|j| scenario.sources[j].branches[branches[j]].beta).sum();
            Some((parties, branches, amp.arg(), mech))
        })
        .collect();

    let counts = |parties: &[usize]| {
        let mut c = vec![0usize; reg.parties()];
        for &p in parties {
            c[p] += 1;
        }
        c
    };
    let mut bracket_cache: HashMap<(usize, usize, usize, usize), Option<f64>> = HashMap::new();
    let mut out = Vec::new();
    for a in 0..components.len() {
        for b in a + 1..components.len() {
            let (x, bx, arg_x, mech_x) = &components[a];
            let (xp, bxp, arg_xp, mech_xp) = &components[b];
            if counts(x) != counts(xp) {
                continue;
            }
            let state_phase = wrap_phase(arg_x - arg_xp - (mech_x - mech_xp));
            let direct: f64 = (0..d).map(|j| gauge[j][bx[j]] - gauge[j][bxp[j]]).sum();
            let decomp = decompose_phase(&Assignment(x.clone()), &Assignment(xp.clone()))?;
            // a bracket may need a source-to-party path no branch provides
            let mut loop_value = uniform_charge.then_some(0.0);
            for br in &decomp.brackets {
                let Some(total) = loop_value.as_mut() else { break };
                let key = (br.party, br.source, br.other_source, br.other_party);
                let v = match bracket_cache.get(&key) {
                    Some(v) => *v,
                    None => match bracket_phase(br, &paths, &scenario.potential, charges[0]) {
                        Ok(v) => {
                            bracket_cache.insert(key, Some(v));
                            Some(v)
                        }
                        Err(LoopError::MissingPath(_)) => {
                            bracket_cache.insert(key, None);
                            None
                        }
                        Err(e) => return Err(e.into()),
                    },
                };
                match v {
                    Some(v) => *total += v,
                    None => loop_value = None,
                }
            }
            let loop_value = loop_value.map(wrap_phase);
            out.push(InterferenceTerm {
                x: x.clone(),
                x_prime: xp.clone(),
                state_phase,
                direct_phase: wrap_phase(direct),
                loop_phase: loop_value,
                brackets: decomp.brackets,
            });
        }
    }
    Ok(out)
}

/// Chosen branch of every source in basis state `b`, if it is determined.
fn branches_of(b: &BasisState, feeder: &HashMap<usize, (usize, usize)>, d: usize) -> Option<Vec<usize>> {
    let mut chosen = vec![usize::MAX; d];
    for (m, &n) in b.0.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let &(j, k) = feeder.get(&m)?;
        if n != 1 || chosen[j] != usize::MAX {
            return None;
        }
        chosen[j] = k;
    }
    chosen.iter().all(|&k| k != usize::MAX).then_some(chosen)
}
