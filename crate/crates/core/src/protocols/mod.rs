//! LOCC phase-measurement protocols built on emission scenarios.
//!
//! A scenario is a set of sources, each emitting one particle into a
//! superposition of branches. A branch carries an amplitude, a mechanical
//! phase `β`, a worldline to its target mode, and picks up the gauge phase
//! accumulated along that worldline.

mod annihilation;
mod general;
mod geometry;
mod tomography;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use thiserror::Error;

use crate::estimation::{wrap_phase, EstimationError, Pattern};
use crate::fock::{beam_splitter, BasisState, FockError, ModeRegistry, QuantumState};
use crate::gauge::{bipartite_loop, line_phase, loop_phase, GaugeError, GaugePotential, SpacetimeEvent, SpacetimePath};
use crate::loopdecomp::LoopError;
use crate::superselection::{check_observable, sector_of, Rule, RuleSet, Verdict};

pub use annihilation::{annihilation_protocol, AnnihilationModes};
pub use general::{general_outcome_distribution, GeneralResult, InterferenceTerm};
pub use geometry::{annihilation_scenario, two_party_scenario, Statistics, TwoPartyGeometry};
pub use tomography::{
    compute_interference_sign, interference_probability, tomography_run, tomography_with_support, Shots,
    TomographyEdge, TomographyResult, TomographyTarget,
};

/// Two-sided tolerance on branch normalization.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error("measurement {what} is forbidden by {rule}")]
    ForbiddenMeasurement { rule: Rule, what: String },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("support misestimated: outcome weight {weight:e} is not explained by the estimated support")]
    SupportMisestimate { weight: f64 },
    #[error("support graph is disconnected: {reached} of {total} patterns reachable")]
    Unsolvable { reached: usize, total: usize },
    #[error("patterns {x:?} and {y:?} lie in different parity sectors")]
    SectorMismatch { x: Pattern, y: Pattern },
}

#[derive(Debug, Clone)]
pub struct EmissionBranch {
    pub amplitude: f64,
    pub beta: f64,
    pub path: SpacetimePath,
    pub target: usize,
}

#[derive(Debug, Clone)]
pub struct Source {
    pub emission: SpacetimeEvent,
    pub branches: Vec<EmissionBranch>,
}

/// Unitary on a subset of one party's modes.
#[derive(Debug, Clone)]
pub struct LocalOp {
    pub party: usize,
    pub modes: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Postselection {
    None,
    /// Exactly one particle at every party.
    OnePerParty,
    /// At most one particle per party.
    DistinctParties,
    /// Every party holds either nothing or one particle from each source.
    CoLocatedPairs,
}

#[derive(Debug, Clone)]
pub struct MeasurementSpec {
    /// Empty means all modes.
    pub modes: Vec<usize>,
    pub postselection: Postselection,
}

#[derive(Debug, Clone)]
pub struct EmissionScenario {
    pub registry: Arc<ModeRegistry>,
    pub sources: Vec<Source>,
    pub potential: GaugePotential,
    pub rules: RuleSet,
    pub local_ops: Vec<LocalOp>,
    pub measurement: MeasurementSpec,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExtractedPhase {
    pub label: String,
    /// Phase read off the simulated statistics.
    pub value: f64,
    /// Mechanical plus loop contribution.
    pub predicted: f64,
    pub mechanical: f64,
    pub loop_value: Option<f64>,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SettingDistribution {
    pub setting: f64,
    pub distribution: BTreeMap<Pattern, f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProtocolResult {
    pub postselection_probability: f64,
    pub measured_modes: Vec<usize>,
    /// Distribution at the first setting.
    pub distribution: BTreeMap<Pattern, f64>,
    pub settings: Vec<SettingDistribution>,
    pub phases: Vec<ExtractedPhase>,
}

impl EmissionScenario {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::InvalidScenario(m));
        if self.sources.is_empty() {
            return bad("no sources".into());
        }
        for (j, s) in self.sources.iter().enumerate() {
            if s.branches.is_empty() {
                return bad(format!("source {j} has no branches"));
            }
            let norm: f64 = s.branches.iter().map(|b| b.amplitude * b.amplitude).sum();
            if (norm - 1.0).abs() > NORMALIZATION_TOL {
                return bad(format!("source {j} branch weights sum to {norm}"));
            }
            let mut targets: Vec<usize> = s.branches.iter().map(|b| b.target).collect();
            targets.sort_unstable();
            if targets.windows(2).any(|w| w[0] == w[1]) {
                return bad(format!("source {j} has two branches into one mode"));
            }
            let first = self.registry.mode(s.branches[0].target)?.species;
            for b in &s.branches {
                let desc = self.registry.mode(b.target)?;
                if desc.species != first {
                    return bad(format!("source {j} emits into modes of different species"));
                }
                let gap = b.path.start().max_separation(&s.emission);
                if gap > crate::gauge::CHAIN_TOLERANCE {
                    return bad(format!("source {j}: a branch path starts {gap:e} away from the emission event"));
                }
            }
        }
        Ok(())
    }

    pub fn charge_of_source(&self, source: usize) -> i32 {
        let b = &self.sources[source].branches[0];
        self.registry.modes()[b.target].species.charge()
    }

    /// Gauge phase of every branch, `[source][branch]`.
    pub fn gauge_phases(&self) -> Result<Vec<Vec<f64>>, ProtocolError> {
        self.sources
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let q = self.charge_of_source(j);
                s.branches.iter().map(|b| Ok(line_phase(&self.potential, &b.path, q)?)).collect()
            })
            .collect()
    }

    fn measured_modes(&self) -> Vec<usize> {
        if self.measurement.modes.is_empty() {
            (0..self.registry.len()).collect()
        } else {
            self.measurement.modes.clone()
        }
    }
}

/// Joint state after every source has emitted.
///
/// Each component is the creation product in canonical mode order, weighted
/// by `Π a·e^{i(β + gauge)}` over the chosen branches. Components that put
/// two fermions in one mode are dropped; the result is renormalized.
pub fn build_emission_state(scenario: &EmissionScenario) -> Result<QuantumState, ProtocolError> {
    scenario.validate()?;
    let reg = scenario.registry.clone();
    let gauge = scenario.gauge_phases()?;
    let mut partial: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    partial.insert(vec![0; reg.len()], Complex64::new(1.0, 0.0));
    for (j, s) in scenario.sources.iter().enumerate() {
        let mut next: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, amp) in &partial {
            for (k, b) in s.branches.iter().enumerate() {
                let mut o = occ.clone();
                o[b.target] += 1;
                let species = reg.modes()[b.target].species;
                if species.is_fermion() && o[b.target] > 1 {
                    continue;
                }
                if !species.is_fermion() && o[b.target] > reg.boson_cap() {
                    return Err(FockError::BosonCapExceeded { mode: b.target, cap: reg.boson_cap() }.into());
                }
                let a = amp * Complex64::from_polar(b.amplitude, b.beta + gauge[j][k]);
                *next.entry(o).or_insert(Complex64::new(0.0, 0.0)) += a;
            }
        }
        partial = next;
    }
    let terms = partial.into_iter().map(|(occ, a)| {
        let f: f64 = occ.iter().map(|&n| (1..=n as u64).product::<u64>() as f64).product();
        (BasisState(occ), a * f.sqrt())
    });
    let state = QuantumState::from_amplitudes(reg, terms)?;
    if state.is_zero() {
        return Err(ProtocolError::InvalidScenario("emission state vanishes".into()));
    }
    Ok(state.normalized())
}

/// Postselection predicate over the modes in `modes`.
pub fn postselection_predicate(
    registry: &ModeRegistry,
    rule: Postselection,
    modes: &[usize],
) -> impl Fn(&BasisState) -> bool {
    let parties = registry.parties();
    let owner: Vec<usize> = registry.modes().iter().map(|m| m.party).collect();
    let involved: Vec<bool> = (0..parties).map(|p| modes.iter().any(|&m| owner[m] == p)).collect();
    let modes = modes.to_vec();
    move |b: &BasisState| {
        let mut count = vec![0u32; parties];
        for &m in &modes {
            count[owner[m]] += b.0[m] as u32;
        }
        match rule {
            Postselection::None | Postselection::CoLocatedPairs => true,
            Postselection::OnePerParty => (0..parties).all(|p| !involved[p] || count[p] == 1),
            Postselection::DistinctParties => count.iter().all(|&c| c <= 1),
        }
    }
}

/// `Σ` over all branch choices of the product weight, for choices accepted by
/// `accept`. Branch weights are exact rationals; `accept` sees the party of
/// every source's chosen branch.
pub fn exact_acceptance(
    sources: &[Vec<(usize, Ratio<i64>)>],
    accept: impl Fn(&[usize]) -> bool,
) -> Ratio<i64> {
    fn walk(
        sources: &[Vec<(usize, Ratio<i64>)>],
        chosen: &mut Vec<usize>,
        weight: Ratio<i64>,
        accept: &dyn Fn(&[usize]) -> bool,
    ) -> Ratio<i64> {
        if chosen.len() == sources.len() {
            return if accept(chosen) { weight } else { Ratio::from_integer(0) };
        }
        let mut total = Ratio::from_integer(0);
        for &(party, w) in &sources[chosen.len()] {
            chosen.push(party);
            total += walk(sources, chosen, weight * w, accept);
            chosen.pop();
        }
        total
    }
    walk(sources, &mut Vec::new(), Ratio::from_integer(1), &accept)
}

/// `(c†_a + s·e^{iα} c†_b)|0⟩/√2`.
fn local_projector(registry: &Arc<ModeRegistry>, a: usize, b: usize, sign: f64, alpha: f64) -> Result<QuantumState, FockError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    QuantumState::vacuum(registry.clone())
        .apply_creation_combination(&[(a, Complex64::new(h, 0.0)), (b, Complex64::from_polar(sign * h, alpha))])
}

fn require_allowed(projector: &QuantumState, rules: RuleSet, what: impl Into<String>) -> Result<(), ProtocolError> {
    match check_observable(projector, rules) {
        Verdict::Allowed => Ok(()),
        Verdict::Forbidden { violated } => Err(ProtocolError::ForbiddenMeasurement { rule: violated, what: what.into() }),
    }
}

/// `E = Σ s_A s_B P` for a distribution over patterns `[a0, a1, b0, b1]`,
/// where `s = +1` when the particle sits in the first mode of the pair.
fn correlator(dist: &BTreeMap<Pattern, f64>) -> f64 {
    dist.iter()
        .map(|(p, &w)| {
            let sa = if p[0] == 1 { 1.0 } else { -1.0 };
            let sb = if p[2] == 1 { 1.0 } else { -1.0 };
            sa * sb * w
        })
        .sum()
}

/// Model of the two-party statistics:
/// `P(s_A, s_B) = (1 + s_A s_B cos(Δφ + α))/4` on patterns `[a0, a1, b0, b1]`.
pub fn two_party_model(alpha: f64, delta: f64) -> BTreeMap<Pattern, f64> {
    let mut out = BTreeMap::new();
    for (sa, pa) in [(1.0, [1u8, 0]), (-1.0, [0, 1])] {
        for (sb, pb) in [(1.0, [1u8, 0]), (-1.0, [0, 1])] {
            out.insert(vec![pa[0], pa[1], pb[0], pb[1]], (1.0 + sa * sb * (delta + alpha).cos()) / 4.0);
        }
    }
    out
}

/// Modes of the two-party layout: `modes[party][source]`.
fn two_party_layout(scenario: &EmissionScenario) -> Result<[[usize; 2]; 2], ProtocolError> {
    let bad = |m: &str| ProtocolError::InvalidScenario(format!("two-party protocol: {m}"));
    if scenario.sources.len() != 2 {
        return Err(bad("needs exactly two sources"));
    }
    let mut modes = [[usize::MAX; 2]; 2];
    for (j, s) in scenario.sources.iter().enumerate() {
        if s.branches.len() != 2 {
            return Err(bad("every source needs one branch per party"));
        }
        for b in &s.branches {
            let p = scenario.registry.mode(b.target)?.party;
            if p > 1 || modes[p][j] != usize::MAX {
                return Err(bad("every source needs one branch per party"));
            }
            modes[p][j] = b.target;
        }
    }
    Ok(modes)
}

/// Branch of source `j` that ends at party `p`.
fn branch_to(scenario: &EmissionScenario, j: usize, p: usize) -> &EmissionBranch {
    scenario.sources[j]
        .branches
        .iter()
        .find(|b| scenario.registry.modes()[b.target].party == p)
        .expect("layout checked")
}

/// Two sources, two parties, one particle kept per party. Party 0 applies a
/// fixed beam splitter to its pair of modes, party 1 one with phase `α`, for
/// each `α` in `settings`. `Δφ` is extracted from the `α = 0` and `α = π/2`
/// correlators and compared with the loop
/// `+γ(0,0) − γ(0,1) + γ(1,1) − γ(1,0)`.
pub fn two_party_phase_protocol(scenario: &EmissionScenario, settings: &[f64]) -> Result<ProtocolResult, ProtocolError> {
    let modes = two_party_layout(scenario)?;
    let measured = vec![modes[0][0], modes[0][1], modes[1][0], modes[1][1]];
    let psi = build_emission_state(scenario)?;
    let (kept, p) = psi.postselect(postselection_predicate(&scenario.registry, Postselection::OnePerParty, &measured))?;

    let run = |alpha: f64| -> Result<BTreeMap<Pattern, f64>, ProtocolError> {
        for (party, a) in [(0usize, 0.0), (1, alpha)] {
            for s in [1.0, -1.0] {
                let proj = local_projector(&scenario.registry, modes[party][0], modes[party][1], s, a)?;
                require_allowed(&proj, scenario.rules, format!("at party {party}"))?;
            }
        }
        let out = kept
            .apply_linear_mode_transform(&[modes[0][0], modes[0][1]], &beam_splitter(0.0))?
            .apply_linear_mode_transform(&[modes[1][0], modes[1][1]], &beam_splitter(alpha))?;
        Ok(out.measure_occupation(&measured).probabilities())
    };

    let mut all: Vec<f64> = vec![0.0, std::f64::consts::FRAC_PI_2];
    for &a in settings {
        if !all.iter().any(|&b| b == a) {
            all.push(a);
        }
    }
    let mut dists = Vec::with_capacity(all.len());
    for &a in &all {
        dists.push(SettingDistribution { setting: a, distribution: run(a)? });
    }
    let value = (-correlator(&dists[1].distribution)).atan2(correlator(&dists[0].distribution));

    let beta = |j, p| branch_to(scenario, j, p).beta;
    let mechanical = beta(0, 0) + beta(1, 1) - beta(1, 0) - beta(0, 1);
    let path = |j, p| &branch_to(scenario, j, p).path;
    let chain = bipartite_loop(path(0, 0), path(1, 0), path(1, 1), path(0, 1));
    let q = scenario.charge_of_source(0);
    let loop_value = loop_phase(&scenario.potential, &chain, q).ok();
    let gauge_part = match loop_value {
        Some(v) => v,
        None => {
            let g = scenario.gauge_phases()?;
            let gp = |j: usize, p: usize| {
                let k = scenario.sources[j].branches.iter().position(|b| b.target == modes[p][j]).expect("layout");
                g[j][k]
            };
            gp(0, 0) + gp(1, 1) - gp(1, 0) - gp(0, 1)
        }
    };
    let phase = ExtractedPhase {
        label: "delta_phi".into(),
        value,
        predicted: wrap_phase(mechanical + gauge_part),
        mechanical,
        loop_value,
        provenance: "mechanical + loop +γ(0,0) −γ(0,1) +γ(1,1) −γ(1,0)".into(),
    };

    let requested: Vec<SettingDistribution> =
        settings.iter().map(|a| dists.iter().find(|d| d.setting == *a).expect("run").clone()).collect();
    let settings_out = if requested.is_empty() { dists[..1].to_vec() } else { requested };
    Ok(ProtocolResult {
        postselection_probability: p,
        measured_modes: measured,
        distribution: settings_out[0].distribution.clone(),
        settings: settings_out,
        phases: vec![phase],
    })
}

/// Outcome of the N-party single-particle protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct NPartyResult {
    pub result: ProtocolResult,
    /// Acceptance probability computed with exact rational weights.
    pub exact_acceptance: Ratio<i64>,
}

/// Registry with two uncharged fermion modes per party: label `"1"` for the
/// first source, `"2"` for the second.
pub fn n_party_registry(parties: usize) -> Result<Arc<ModeRegistry>, FockError> {
    use crate::fock::{ModeDescriptor, Register, Species, DEFAULT_BOSON_CAP};
    let s = Species::Fermion { charge: 0 };
    let modes = (0..parties)
        .flat_map(|p| [ModeDescriptor::new(p, Register::Primary, "1", s), ModeDescriptor::new(p, Register::Primary, "2", s)])
        .collect();
    Ok(Arc::new(ModeRegistry::new(modes, DEFAULT_BOSON_CAP)?))
}

/// Two sources, each sending one particle into a uniform superposition over
/// `N` parties; the second source's branch to party `i` carries phase
/// `phases[i]`. Accepts runs with the particles at distinct parties and, for
/// every pair `i < j`, extracts `φ_i − φ_j` from the runs in which the two
/// particles landed at `i` and `j`.
pub fn n_party_single_particle(phases: &[f64]) -> Result<NPartyResult, ProtocolError> {
    let n = phases.len();
    if n < 2 {
        return Err(ProtocolError::InvalidScenario("need at least two parties".into()));
    }
    let reg = n_party_registry(n)?;
    let amp = 1.0 / (n as f64).sqrt();
    let origin = SpacetimeEvent::new(0.0, 0.0, 0.0, 0.0);
    let mut sources = Vec::new();
    for (label, betas) in [("1", vec![0.0; n]), ("2", phases.to_vec())] {
        let branches = (0..n)
            .map(|p| {
                let path = SpacetimePath::new(vec![origin, SpacetimeEvent::new(1.0, (p + 1) as f64, 0.0, 0.0)])?;
                let target = reg.index_of(p, crate::fock::Register::Primary, label).expect("registry built above");
                Ok(EmissionBranch { amplitude: amp, beta: betas[p], path, target })
            })
            .collect::<Result<Vec<_>, GaugeError>>()?;
        sources.push(Source { emission: origin, branches });
    }
    let scenario = EmissionScenario {
        registry: reg.clone(),
        sources,
        potential: GaugePotential::Zero,
        rules: RuleSet::ALL,
        local_ops: Vec::new(),
        measurement: MeasurementSpec { modes: Vec::new(), postselection: Postselection::DistinctParties },
    };
    let psi = build_emission_state(&scenario)?;
    let all: Vec<usize> = (0..reg.len()).collect();
    let (kept, p) = psi.postselect(postselection_predicate(&reg, Postselection::DistinctParties, &all))?;

    let w = Ratio::new(1, n as i64);
    let weights: Vec<Vec<(usize, Ratio<i64>)>> = vec![(0..n).map(|p| (p, w)).collect(); 2];
    let exact = exact_acceptance(&weights, |parties| parties[0] != parties[1]);

    let mut out_phases = Vec::new();
    let mut settings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mi = [reg.index_of(i, crate::fock::Register::Primary, "1").unwrap(), reg.index_of(i, crate::fock::Register::Primary, "2").unwrap()];
            let mj = [reg.index_of(j, crate::fock::Register::Primary, "1").unwrap(), reg.index_of(j, crate::fock::Register::Primary, "2").unwrap()];
            let at_pair = |b: &BasisState| b.0[mi[0]] + b.0[mi[1]] == 1 && b.0[mj[0]] + b.0[mj[1]] == 1;
            let (pair_state, _) = kept.postselect(at_pair)?;
            // Party j plays the fixed side, so the readout is φ_i − φ_j.
            let measured = vec![mj[0], mj[1], mi[0], mi[1]];
            let mut dists = Vec::new();
            for alpha in [0.0, std::f64::consts::FRAC_PI_2] {
                let out = pair_state
                    .apply_linear_mode_transform(&mj, &beam_splitter(0.0))?
                    .apply_linear_mode_transform(&mi, &beam_splitter(alpha))?;
                dists.push(out.measure_occupation(&measured).probabilities());
            }
            let value = (-correlator(&dists[1])).atan2(correlator(&dists[0]));
            let mechanical = wrap_phase(phases[i] - phases[j]);
            out_phases.push(ExtractedPhase {
                label: format!("pair({i},{j})"),
                value,
                predicted: mechanical,
                mechanical,
                loop_value: None,
                provenance: format!("φ_{i} − φ_{j}"),
            });
            if settings.is_empty() {
                settings = [0.0, std::f64::consts::FRAC_PI_2]
                    .iter()
                    .zip(dists)
                    .map(|(&s, d)| SettingDistribution { setting: s, distribution: d })
                    .collect();
            }
        }
    }
    let distribution = kept.measure_occupation(&all).probabilities();
    Ok(NPartyResult {
        result: ProtocolResult {
            postselection_probability: p,
            measured_modes: all,
            distribution,
            settings,
            phases: out_phases,
        },
        exact_acceptance: exact,
    })
}

/// `Π_i (|0⟩ + s_i e^{iα_i} |n_i⟩)/√2` over sites with disjoint occupation
/// patterns `n_i`; every component is a canonically ordered product.
pub fn vacuum_projector(
    registry: &Arc<ModeRegistry>,
    sites: &[Vec<usize>],
    signs: &[f64],
    alphas: &[f64],
) -> Result<QuantumState, FockError> {
    let k = sites.len();
    let norm = (2f64).powi(-(k as i32)).sqrt();
    let mut terms = Vec::with_capacity(1 << k);
    for mask in 0u32..(1 << k) {
        let mut occ = vec![0u8; registry.len()];
        let mut amp = Complex64::new(norm, 0.0);
        for i in 0..k {
            if mask & (1 << i) != 0 {
                for &m in &sites[i] {
                    occ[m] += 1;
                }
                amp *= Complex64::from_polar(signs[i], alphas[i]);
            }
        }
        terms.push((BasisState(occ), amp));
    }
    QuantumState::from_amplitudes(registry.clone(), terms)
}

/// Measures `state` with product projectors `(|0⟩ ± e^{iα_i}|n_i⟩)/√2` at two
/// sites, site 0 at `α = 0` and site 1 at each setting. Returns the sign
/// distributions keyed by `[s_0 == +, s_1 == +]` and the phase
/// `arg(amp_1/amp_0)` extracted from the `0` and `π/2` correlators.
pub fn vacuum_projector_protocol(
    state: &QuantumState,
    sites: &[Vec<usize>; 2],
    rules: RuleSet,
    settings: &[f64],
) -> Result<(Vec<SettingDistribution>, f64), ProtocolError> {
    let reg = state.registry().clone();
    let run = |alpha: f64| -> Result<BTreeMap<Pattern, f64>, ProtocolError> {
        let mut dist = BTreeMap::new();
        for (s0, k0) in [(1.0, 1u8), (-1.0, 0)] {
            for (s1, k1) in [(1.0, 1u8), (-1.0, 0)] {
                let proj = vacuum_projector(&reg, sites, &[s0, s1], &[0.0, alpha])?;
                for (i, site) in sites.iter().enumerate() {
                    let a = if i == 0 { 0.0 } else { alpha };
                    let local = vacuum_projector(&reg, std::slice::from_ref(site), &[if i == 0 { s0 } else { s1 }], &[a])?;
                    require_allowed(&local, rules, format!("vacuum superposition at site {i}"))?;
                }
                dist.insert(vec![k0, k1], proj.inner_product(state)?.norm_sqr());
            }
        }
        Ok(dist)
    };
    let e = |d: &BTreeMap<Pattern, f64>| -> f64 {
        d.iter().map(|(k, &w)| if k[0] == k[1] { w } else { -w }).sum()
    };
    let d0 = run(0.0)?;
    let d1 = run(std::f64::consts::FRAC_PI_2)?;
    let value = e(&d1).atan2(e(&d0));
    let mut out = Vec::new();
    for &a in settings {
        let d = if a == 0.0 { d0.clone() } else if a == std::f64::consts::FRAC_PI_2 { d1.clone() } else { run(a)? };
        out.push(SettingDistribution { setting: a, distribution: d });
    }
    if out.is_empty() {
        out.push(SettingDistribution { setting: 0.0, distribution: d0 });
    }
    Ok((out, value))
}

/// Probabilities of the product-projector measurement on a state
/// `(|n_0⟩ + e^{iΔ}|n_1⟩)/√2`: `(1 + s_0 s_1 cos(Δ − α))/4`.
pub fn vacuum_projector_model(alpha: f64, delta: f64) -> BTreeMap<Pattern, f64> {
    let mut out = BTreeMap::new();
    for (s0, k0) in [(1.0, 1u8), (-1.0, 0)] {
        for (s1, k1) in [(1.0, 1u8), (-1.0, 0)] {
            out.insert(vec![k0, k1], (1.0 + s0 * s1 * (delta - alpha).cos()) / 4.0);
        }
    }
    out
}

/// Sector check used by the tomography front end.
pub(crate) fn parity_of(registry: &ModeRegistry, b: &BasisState) -> i8 {
    sector_of(registry, b).parity
}
