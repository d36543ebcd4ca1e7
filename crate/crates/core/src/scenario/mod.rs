//! Declarative scenario runner behind the command-line tool.

mod parse;
mod report;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::estimation::{circular_distance, mle_delta_phi, sample_settings, wrap_phase, Pattern};
use crate::fock::{BasisState, ModeDescriptor, ModeRegistry, Species};
use crate::gauge::{
    gauge_transformed, FluxSchedule, GaugeError, GaugePotential, Monomial, PathBuilder, Polynomial, ScalarField,
    SpacetimePath,
};
use crate::loopdecomp::{decompose_phase, Assignment, LoopDecomposition};
use crate::protocols::{
    annihilation_protocol, build_emission_state, general_outcome_distribution, n_party_registry, n_party_single_particle,
    postselection_predicate, tomography_run, two_party_model, two_party_phase_protocol, two_party_scenario,
    vacuum_projector_model, vacuum_projector_protocol, EmissionBranch, EmissionScenario, ExtractedPhase,
    InterferenceTerm, LocalOp, MeasurementSpec, ProtocolError, Shots, Source, Statistics, TomographyResult,
    TomographyTarget, TwoPartyGeometry,
};
use crate::superselection::RuleSet;

pub use parse::{
    parse_real, parse_scenario, BranchSpec, ExecutionSpec, LocalOpSpec, ModeLine, ModeRef, PathStep, PotentialSpec,
    ProtocolKind, ScenarioFile, SourceSpec, TomographySpec,
};
pub use report::{
    conventions, parse_report, Check, GaugeCheck, ReportDistribution, ReportEstimate, ResolvedScenario, RunReport,
    REPORT_CLOSE, REPORT_OPEN,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("{0}")]
    Io(String),
    #[error("report: {0}")]
    Report(String),
}

impl From<GaugeError> for CliError {
    fn from(e: GaugeError) -> Self {
        CliError::Protocol(e.into())
    }
}

/// Command-line overrides of the `[execution]` section.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunFlags {
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub exact: bool,
    /// Overrides both rule flags.
    pub enforce_ssr: Option<bool>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Execution {
    shots: Option<u64>,
    seed: u64,
    rules: RuleSet,
    tolerance: f64,
}

fn resolve_execution(spec: &ExecutionSpec, flags: &RunFlags) -> Execution {
    let shots = if flags.exact { None } else { flags.shots.or(spec.shots) };
    let shots = shots.filter(|&n| n > 0);
    let rules = match flags.enforce_ssr {
        Some(on) => RuleSet { enforce_parity: on, enforce_charge: on },
        None => RuleSet { enforce_parity: spec.enforce_parity, enforce_charge: spec.enforce_charge },
    };
    Execution { shots, seed: flags.seed.unwrap_or(spec.seed), rules, tolerance: flags.tolerance.unwrap_or(spec.tolerance) }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioFile, CliError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

/// A scenario file resolved against its registry.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub scenario: EmissionScenario,
    pub party_names: Vec<String>,
    pub mode_names: Vec<String>,
}

fn polynomial_potential(terms: &[Monomial]) -> Arc<dyn ScalarField> {
    Arc::new(Polynomial::new(terms.to_vec()))
}

fn build_potential(spec: &PotentialSpec) -> Result<GaugePotential, CliError> {
    Ok(match spec {
        PotentialSpec::Zero => GaugePotential::Zero,
        PotentialSpec::Solenoid { breakpoints } => {
            GaugePotential::Solenoid { schedule: FluxSchedule::new(breakpoints.clone())? }
        }
        PotentialSpec::PureGauge { terms } => GaugePotential::PureGauge { chi: polynomial_potential(terms) },
    })
}

fn describe_potential(spec: &PotentialSpec) -> String {
    match spec {
        PotentialSpec::Zero => "zero".into(),
        PotentialSpec::Solenoid { breakpoints } => {
            let bp: Vec<String> = breakpoints.iter().map(|(t, f)| format!("({t}, {f})")).collect();
            format!("solenoid on the z axis, flux breakpoints {}", bp.join(" "))
        }
        PotentialSpec::PureGauge { terms } => format!("pure gauge, {} monomials", terms.len()),
    }
}

fn mode_name(reg: &ModeRegistry, parties: &[String], m: usize) -> String {
    let d = &reg.modes()[m];
    let species = match d.species {
        Species::Fermion { charge } => format!("fermion q={charge}"),
        Species::Boson => "boson".into(),
    };
    format!("{}/{:?}/{} {species}", parties[d.party], d.register, d.label).to_lowercase()
}

fn short_mode_name(reg: &ModeRegistry, parties: &[String], m: usize) -> String {
    let d = &reg.modes()[m];
    format!("{}:{}", parties[d.party], d.label)
}

pub fn build_scenario(file: &ScenarioFile, rules: RuleSet) -> Result<BuiltScenario, CliError> {
    let party_of: HashMap<&str, usize> = file.parties.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let modes: Vec<ModeDescriptor> = file
        .modes
        .iter()
        .map(|m| {
            let species = if m.fermion { Species::Fermion { charge: m.charge } } else { Species::Boson };
            ModeDescriptor::new(party_of[m.party.as_str()], m.register, m.label.clone(), species)
        })
        .collect();
    let registry = Arc::new(ModeRegistry::new(modes, file.boson_cap).map_err(|e| CliError::Validation(e.to_string()))?);
    let resolve = |r: &ModeRef, line: usize| -> Result<usize, CliError> {
        let p = *party_of
            .get(r.party.as_str())
            .ok_or_else(|| CliError::Parse { line, message: format!("undeclared party '{}'", r.party) })?;
        let hits: Vec<usize> =
            registry.modes_of_party(p).into_iter().filter(|&m| registry.modes()[m].label == r.label).collect();
        match hits.as_slice() {
            [m] => Ok(*m),
            [] => Err(CliError::Parse { line, message: format!("undeclared mode {}:{}", r.party, r.label) }),
            _ => Err(CliError::Parse { line, message: format!("mode label {}:{} is ambiguous", r.party, r.label) }),
        }
    };

    let mut sources = Vec::new();
    for s in &file.sources {
        let emission = s.emission.expect("checked by the parser");
        let mut branches = Vec::new();
        for b in &s.branches {
            let mut builder = PathBuilder::start(emission);
            for step in &b.steps {
                builder = match *step {
                    PathStep::To(e) => builder.to(e),
                    PathStep::Wait(t) => builder.wait(t),
                    PathStep::Arc { t, angle, segments } => builder.arc(t, angle, segments),
                    PathStep::Sweep { t, delta, segments } => builder.sweep(t, delta, segments),
                };
            }
            let path: SpacetimePath =
                builder.build().map_err(|e| CliError::Parse { line: b.line, message: e.to_string() })?;
            branches.push(EmissionBranch { amplitude: b.amplitude, beta: b.beta, path, target: resolve(&b.target, b.line)? });
        }
        sources.push(Source { emission, branches });
    }

    let mut local_ops = Vec::new();
    for op in &file.local_ops {
        let party = *party_of
            .get(op.party.as_str())
            .ok_or_else(|| CliError::Parse { line: op.line, message: format!("undeclared party '{}'", op.party) })?;
        let modes = op.modes.iter().map(|r| resolve(r, op.line)).collect::<Result<Vec<_>, _>>()?;
        let n = modes.len();
        if op.rows.len() != n || op.rows.iter().any(|r| r.len() != n) {
            return Err(CliError::Parse { line: op.line, message: format!("local_op needs a {n}x{n} matrix") });
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| op.rows[i][j]);
        local_ops.push(LocalOp { party, modes, matrix });
    }
    let measured = file.measured.iter().map(|r| resolve(r, 0)).collect::<Result<Vec<_>, _>>()?;
    let scenario = EmissionScenario {
        registry: registry.clone(),
        sources,
        potential: build_potential(&file.potential)?,
        rules,
        local_ops,
        measurement: MeasurementSpec { modes: measured, postselection: file.postselection },
    };
    let mode_names = (0..registry.len()).map(|m| mode_name(&registry, &file.parties, m)).collect();
    Ok(BuiltScenario { scenario, party_names: file.parties.clone(), mode_names })
}

/// Everything a protocol run produces before it is formatted.
#[derive(Debug, Clone, Default)]
struct Outcome {
    postselection_probability: Option<f64>,
    exact_acceptance: Option<String>,
    measured: Vec<usize>,
    distributions: Vec<(f64, BTreeMap<Pattern, f64>)>,
    phases: Vec<ExtractedPhase>,
    interference: Vec<InterferenceTerm>,
    tomography: Option<TomographyResult>,
    /// Distributions at 0 and π/2 plus the model used for estimation.
    estimation: Option<(Vec<(f64, BTreeMap<Pattern, f64>)>, EstimationModel)>,
    checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy)]
enum EstimationModel {
    TwoParty,
    VacuumProjector,
}

fn with_quadratures(settings: &[f64]) -> Vec<f64> {
    let mut all = vec![0.0, std::f64::consts::FRAC_PI_2];
    for &s in settings {
        if !all.contains(&s) {
            all.push(s);
        }
    }
    all
}

fn phase_check(name: &str, value: f64, expected: f64, tolerance: f64) -> Check {
    let deviation = circular_distance(value, expected);
    Check { name: name.into(), value, expected, deviation, tolerance, passed: deviation <= tolerance }
}

fn execute(
    kind: ProtocolKind,
    built: &BuiltScenario,
    file: Option<&ScenarioFile>,
    exec: &Execution,
) -> Result<Outcome, CliError> {
    let scn = &built.scenario;
    let settings = file.map(|f| f.settings.clone()).unwrap_or_default();
    let mut out = Outcome::default();
    match kind {
        ProtocolKind::TwoParty | ProtocolKind::Annihilation => {
            let all = with_quadratures(&settings);
            let r = if kind == ProtocolKind::TwoParty {
                two_party_phase_protocol(scn, &all)?
            } else {
                annihilation_protocol(scn, &all)?
            };
            out.postselection_probability = Some(r.postselection_probability);
            out.measured = r.measured_modes.clone();
            let shown: Vec<f64> = if settings.is_empty() { vec![0.0] } else { settings.clone() };
            for s in &r.settings {
                if shown.contains(&s.setting) {
                    out.distributions.push((s.setting, s.distribution.clone()));
                }
            }
            for p in &r.phases {
                out.checks.push(phase_check(&format!("{}_vs_loop", p.label), p.value, p.predicted, exec.tolerance));
            }
            out.phases = r.phases;
            let model =
                if kind == ProtocolKind::TwoParty { EstimationModel::TwoParty } else { EstimationModel::VacuumProjector };
            out.estimation = Some((r.settings.iter().map(|s| (s.setting, s.distribution.clone())).collect(), model));
        }
        ProtocolKind::VacuumProjector => {
            let f = file.ok_or_else(|| CliError::Validation("vacuum_projector needs a scenario file".into()))?;
            if f.sites.len() != 2 {
                return Err(CliError::Validation("vacuum_projector needs exactly two [sites] entries".into()));
            }
            let reg = &scn.registry;
            let mut sites = Vec::new();
            for site in &f.sites {
                let mut modes = Vec::new();
                for r in site {
                    let p = f.parties.iter().position(|x| *x == r.party).ok_or_else(|| {
                        CliError::Validation(format!("undeclared party '{}'", r.party))
                    })?;
                    let m = reg
                        .modes_of_party(p)
                        .into_iter()
                        .find(|&m| reg.modes()[m].label == r.label)
                        .ok_or_else(|| CliError::Validation(format!("undeclared mode {}:{}", r.party, r.label)))?;
                    modes.push(m);
                }
                sites.push(modes);
            }
            let psi = build_emission_state(scn)?;
            let measured = if scn.measurement.modes.is_empty() { (0..reg.len()).collect() } else { scn.measurement.modes.clone() };
            let (kept, p) = psi.postselect(postselection_predicate(reg, scn.measurement.postselection, &measured)).map_err(ProtocolError::from)?;
            let sites = [sites[0].clone(), sites[1].clone()];
            let all = with_quadratures(&settings);
            let (dists, value) = vacuum_projector_protocol(&kept, &sites, scn.rules, &all)?;
            let occ = |site: &[usize]| {
                let mut b = vec![0u8; reg.len()];
                for &m in site {
                    b[m] += 1;
                }
                kept.amplitude(&BasisState(b))
            };
            let predicted = wrap_phase((occ(&sites[1]) / occ(&sites[0])).arg());
            out.postselection_probability = Some(p);
            out.measured = sites.iter().flatten().copied().collect();
            let shown: Vec<f64> = if settings.is_empty() { vec![0.0] } else { settings.clone() };
            for d in &dists {
                if shown.contains(&d.setting) {
                    out.distributions.push((d.setting, d.distribution.clone()));
                }
            }
            out.checks.push(phase_check("delta_phi_vs_state", value, predicted, exec.tolerance));
            out.phases.push(ExtractedPhase {
                label: "delta_phi".into(),
                value,
                predicted,
                mechanical: 0.0,
                loop_value: None,
                provenance: "arg of the site-1 over site-0 amplitude".into(),
            });
            out.estimation = Some((dists.iter().map(|s| (s.setting, s.distribution.clone())).collect(), EstimationModel::VacuumProjector));
        }
        ProtocolKind::NParty => {
            let f = file.ok_or_else(|| CliError::Validation("n_party needs a scenario file".into()))?;
            let r = n_party_single_particle(&f.n_party_phases)?;
            let n = f.n_party_phases.len();
            out.postselection_probability = Some(r.result.postselection_probability);
            out.exact_acceptance = Some(format!("{}/{}", r.exact_acceptance.numer(), r.exact_acceptance.denom()));
            out.measured = r.result.measured_modes.clone();
            out.distributions.push((0.0, r.result.distribution.clone()));
            let expected = 1.0 - 1.0 / n as f64;
            let dev = (r.result.postselection_probability - expected).abs();
            out.checks.push(Check {
                name: "acceptance".into(),
                value: r.result.postselection_probability,
                expected,
                deviation: dev,
                tolerance: exec.tolerance,
                passed: dev <= exec.tolerance,
            });
            for p in &r.result.phases {
                out.checks.push(phase_check(&p.label, p.value, p.predicted, exec.tolerance));
            }
            out.phases = r.result.phases;
        }
        ProtocolKind::General => {
            let r = general_outcome_distribution(scn)?;
            out.postselection_probability = Some(r.result.postselection_probability);
            out.measured = r.result.measured_modes.clone();
            out.distributions.push((0.0, r.result.distribution.clone()));
            let total: f64 = r.result.distribution.values().sum();
            out.checks.push(Check {
                name: "distribution_sum".into(),
                value: total,
                expected: 1.0,
                deviation: (total - 1.0).abs(),
                tolerance: 1e-12,
                passed: (total - 1.0).abs() <= 1e-12,
            });
            let mut worst = 0.0f64;
            for t in &r.interference {
                if let Some(l) = t.loop_phase {
                    worst = worst.max(circular_distance(t.state_phase, l));
                }
            }
            out.checks.push(Check {
                name: "interference_vs_loops".into(),
                value: worst,
                expected: 0.0,
                deviation: worst,
                tolerance: exec.tolerance,
                passed: worst <= exec.tolerance,
            });
            out.interference = r.interference;
        }
        ProtocolKind::Tomography => {
            let f = file.ok_or_else(|| CliError::Validation("tomography needs a scenario file".into()))?;
            let spec = f.tomography.as_ref().ok_or_else(|| CliError::Validation("missing [tomography] section".into()))?;
            let target = TomographyTarget { modes_per_party: spec.modes_per_party.clone(), components: spec.components.clone() };
            let shots = exec.shots.map_or(Shots::Exact, Shots::Finite);
            let r = tomography_run(&target, shots, exec.seed)?;
            let root = &r.support[0];
            let root_phase = target.components.iter().find(|c| &c.0 == root).map_or(0.0, |c| c.2);
            let mut sq = 0.0;
            let mut count = 0;
            for (x, l, ph) in &target.components {
                if *l == 0.0 {
                    continue;
                }
                if let Some(est) = r.phase_of(x) {
                    let d = circular_distance(est, wrap_phase(ph - root_phase));
                    sq += d * d;
                    count += 1;
                }
            }
            let rms = if count > 0 { (sq / count as f64).sqrt() } else { 0.0 };
            // sampled runs are held to a shot-noise scale instead
            let tolerance = exec.shots.map_or(exec.tolerance, |n| exec.tolerance.max(20.0 / (n as f64).sqrt()));
            out.checks.push(Check {
                name: "phase_rms".into(),
                value: rms,
                expected: 0.0,
                deviation: rms,
                tolerance,
                passed: rms <= tolerance,
            });
            out.tomography = Some(r);
        }
    }
    Ok(out)
}

fn pattern_string(p: &[u8]) -> String {
    p.iter().map(|&b| char::from_digit(b as u32, 36).unwrap_or('?')).collect()
}

fn assemble(
    name: &str,
    kind: ProtocolKind,
    built: &BuiltScenario,
    potential: String,
    exec: &Execution,
    out: Outcome,
) -> Result<RunReport, CliError> {
    let mut estimates = Vec::new();
    if let (Some(shots), Some((dists, model))) = (exec.shots, &out.estimation) {
        let counts = sample_settings(dists, shots, exec.seed);
        let est = match model {
            EstimationModel::TwoParty => mle_delta_phi(&counts, &two_party_model),
            EstimationModel::VacuumProjector => mle_delta_phi(&counts, &vacuum_projector_model),
        }
        .map_err(ProtocolError::from)?;
        estimates.push(ReportEstimate {
            label: out.phases.first().map_or("delta_phi".into(), |p| p.label.clone()),
            value_rad: est.value,
            standard_error_rad: est.standard_error,
            log_likelihood: est.log_likelihood,
            shots_per_setting: shots,
            seed: exec.seed,
        });
    }
    let reg = &built.scenario.registry;
    let measured_modes = if kind == ProtocolKind::Tomography {
        Vec::new()
    } else {
        out.measured.iter().map(|&m| short_mode_name(reg, &built.party_names, m)).collect()
    };
    Ok(RunReport {
        scenario: name.to_string(),
        protocol: kind.name().to_string(),
        conventions: conventions(),
        resolved: ResolvedScenario {
            parties: built.party_names.clone(),
            modes: built.mode_names.clone(),
            potential,
            sources: built.scenario.sources.len(),
            rules: exec.rules,
            shots: exec.shots,
            seed: exec.seed,
            tolerance: exec.tolerance,
        },
        postselection_probability: out.postselection_probability,
        exact_acceptance: out.exact_acceptance,
        measured_modes,
        distributions: out
            .distributions
            .iter()
            .map(|(s, d)| ReportDistribution {
                setting_rad: *s,
                outcomes: d.iter().map(|(k, v)| (pattern_string(k), *v)).collect(),
            })
            .collect(),
        phases: out.phases,
        estimates,
        interference: out.interference,
        tomography: out.tomography,
        gauge_check: None,
        checks: out.checks,
    })
}

fn empty_built() -> BuiltScenario {
    let reg = Arc::new(ModeRegistry::new(Vec::new(), crate::fock::DEFAULT_BOSON_CAP).expect("empty registry"));
    BuiltScenario {
        scenario: EmissionScenario {
            registry: reg,
            sources: Vec::new(),
            potential: GaugePotential::Zero,
            rules: RuleSet::ALL,
            local_ops: Vec::new(),
            measurement: MeasurementSpec { modes: Vec::new(), postselection: crate::protocols::Postselection::None },
        },
        party_names: Vec::new(),
        mode_names: Vec::new(),
    }
}

fn built_for(file: &ScenarioFile, exec: &Execution) -> Result<BuiltScenario, CliError> {
    match file.protocol {
        ProtocolKind::NParty => {
            let n = file.n_party_phases.len();
            let mut b = empty_built();
            b.scenario.registry = n_party_registry(n).map_err(|e| CliError::Validation(e.to_string()))?;
            b.party_names = if file.parties.len() == n { file.parties.clone() } else { (0..n).map(|i| format!("P{i}")).collect() };
            b.mode_names = (0..b.scenario.registry.len()).map(|m| mode_name(&b.scenario.registry, &b.party_names, m)).collect();
            Ok(b)
        }
        ProtocolKind::Tomography => {
            let mut b = empty_built();
            b.party_names = file.parties.clone();
            Ok(b)
        }
        _ => build_scenario(file, exec.rules),
    }
}

/// Parses nothing; runs an already parsed scenario.
pub fn run_scenario(file: &ScenarioFile, flags: &RunFlags) -> Result<RunReport, CliError> {
    let exec = resolve_execution(&file.execution, flags);
    let built = built_for(file, &exec)?;
    let out = execute(file.protocol, &built, Some(file), &exec)?;
    let mut report = assemble(&file.name, file.protocol, &built, describe_potential(&file.potential), &exec, out.clone())?;
    if let Some(terms) = &file.gauge_check {
        report.gauge_check = Some(gauge_check_with(file, &built, &exec, &out, terms)?);
    }
    Ok(report)
}

pub fn run_scenario_file(path: impl AsRef<Path>, flags: &RunFlags) -> Result<RunReport, CliError> {
    run_scenario(&load_scenario(path)?, flags)
}

fn chi_strings(terms: &[Monomial]) -> Vec<String> {
    terms
        .iter()
        .map(|m| format!("{}:{},{},{},{}", m.coeff, m.powers[0], m.powers[1], m.powers[2], m.powers[3]))
        .collect()
}

/// Parses `coef:pt,px,py,pz;coef:...`.
pub fn parse_chi(spec: &str) -> Result<Vec<Monomial>, CliError> {
    spec.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let bad = || CliError::Parse { line: 0, message: format!("bad chi term '{t}', expected coef:pt,px,py,pz") };
            let (c, p) = t.split_once(':').ok_or_else(bad)?;
            let coeff = parse_real(c.trim()).map_err(|_| bad())?;
            let powers: Vec<u32> = p.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
            let powers: [u32; 4] = powers.try_into().map_err(|_| bad())?;
            Ok(Monomial { coeff, powers })
        })
        .collect()
}

fn gauge_check_with(
    file: &ScenarioFile,
    built: &BuiltScenario,
    exec: &Execution,
    base: &Outcome,
    terms: &[Monomial],
) -> Result<GaugeCheck, CliError> {
    if matches!(file.protocol, ProtocolKind::NParty | ProtocolKind::Tomography) {
        return Err(CliError::Validation(format!("{} scenarios carry no gauge potential", file.protocol.name())));
    }
    let mut shifted = built.clone();
    shifted.scenario.potential = gauge_transformed(&built.scenario.potential, polynomial_potential(terms))?;
    let other = execute(file.protocol, &shifted, Some(file), exec)?;
    let mut dp = match (base.postselection_probability, other.postselection_probability) {
        (Some(a), Some(b)) => (a - b).abs(),
        _ => 0.0,
    };
    let all_dists = |o: &Outcome| -> Vec<(f64, BTreeMap<Pattern, f64>)> {
        match &o.estimation {
            Some((d, _)) => d.clone(),
            None => o.distributions.clone(),
        }
    };
    for ((_, a), (_, b)) in all_dists(base).iter().zip(all_dists(&other).iter()) {
        for k in a.keys().chain(b.keys()) {
            dp = dp.max((a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs());
        }
    }
    let mut dphi = 0.0f64;
    for (a, b) in base.phases.iter().zip(&other.phases) {
        dphi = dphi.max(circular_distance(a.value, b.value));
    }
    for (a, b) in base.interference.iter().zip(&other.interference) {
        dphi = dphi.max(circular_distance(a.state_phase, b.state_phase));
    }
    Ok(GaugeCheck {
        chi: chi_strings(terms),
        max_probability_deviation: dp,
        max_phase_deviation_rad: dphi,
        passed: dp < 1e-8 && dphi < 1e-8,
    })
}

/// Runs the scenario and repeats it under the gauge transformation `χ`.
pub fn gauge_check(file: &ScenarioFile, chi: &[Monomial], flags: &RunFlags) -> Result<RunReport, CliError> {
    let exec = resolve_execution(&file.execution, flags);
    let built = built_for(file, &exec)?;
    let out = execute(file.protocol, &built, Some(file), &exec)?;
    let mut report = assemble(&file.name, file.protocol, &built, describe_potential(&file.potential), &exec, out.clone())?;
    report.gauge_check = Some(gauge_check_with(file, &built, &exec, &out, chi)?);
    Ok(report)
}

/// Text summary of the loop decomposition of `Δφ(x, x′)`.
pub fn decompose_report(x: &[usize], x_prime: &[usize]) -> Result<(LoopDecomposition, String), CliError> {
    let d = decompose_phase(&Assignment(x.to_vec()), &Assignment(x_prime.to_vec())).map_err(ProtocolError::from)?;
    let mut s = format!("permutation {:?}\n", d.permutation.0);
    for b in &d.brackets {
        s.push_str(&format!("  {b}\n"));
    }
    s.push_str(&format!("{} brackets\n", d.brackets.len()));
    Ok((d, s))
}

/// Flux profile between the two emissions of the ring geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ramp {
    /// Linear from `t = 1.5` to `t = 2.5`.
    Linear,
    /// Two linear pieces through 30% of the final flux at `t = 1.8`.
    Steps,
}

impl Ramp {
    pub fn schedule(self, flux: f64) -> FluxSchedule {
        let bp = match self {
            Ramp::Linear => vec![(1.5, 0.0), (2.5, flux)],
            Ramp::Steps => vec![(1.2, 0.0), (1.8, 0.3 * flux), (2.8, flux)],
        };
        FluxSchedule::new(bp).expect("fixed breakpoints")
    }
}

/// Two-party protocol on the ring around a solenoid whose flux is switched on
/// while the first particle is already parked at both parties.
pub fn ab_demo(theta: f64, flux: f64, ramp: Ramp, charge: i32) -> Result<RunReport, CliError> {
    let geom = TwoPartyGeometry::aharonov_bohm(theta, ramp.schedule(flux), 1.0)?;
    let scn = two_party_scenario(&geom, Statistics::Fermion, charge, [[0.0; 2]; 2])?;
    let reg = scn.registry.clone();
    let parties = vec!["A".to_string(), "B".to_string()];
    let built = BuiltScenario {
        mode_names: (0..reg.len()).map(|m| mode_name(&reg, &parties, m)).collect(),
        party_names: parties,
        scenario: scn,
    };
    let exec = Execution { shots: None, seed: 0, rules: RuleSet::ALL, tolerance: 1e-6 };
    let mut out = execute(ProtocolKind::TwoParty, &built, None, &exec)?;
    let expected = wrap_phase(charge as f64 * flux * theta / (2.0 * std::f64::consts::PI));
    let value = out.phases[0].value;
    out.checks.push(phase_check("ring_phase", value, expected, exec.tolerance));
    let potential = format!("solenoid, ramp {ramp:?} to flux {flux}");
    assemble("ab_demo", ProtocolKind::TwoParty, &built, potential, &exec, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_parsing() {
        let t = parse_chi("0.5:1,0,0,0; -2:0,1,1,0").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].powers, [0, 1, 1, 0]);
        assert!(parse_chi("1:1,2").is_err());
    }

    #[test]
    fn decompose_identity_has_no_brackets() {
        let (_, text) = decompose_report(&[0, 1, 1], &[0, 1, 1]).unwrap();
        assert!(text.ends_with("0 brackets\n"));
    }

    #[test]
    fn ab_demo_half_turn() {
        let r = ab_demo(std::f64::consts::PI, 2.0 * std::f64::consts::PI, Ramp::Linear, 1).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
        assert!((r.phases[0].value.abs() - std::f64::consts::PI).abs() < 1e-6);
    }
}
