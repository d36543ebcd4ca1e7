//! Ready-made two-source, two-party layouts.

use std::sync::Arc;

use crate::fock::{ModeDescriptor, ModeRegistry, Register, Species, DEFAULT_BOSON_CAP};
use crate::gauge::{FluxSchedule, GaugePotential, PathBuilder, SpacetimeEvent, SpacetimePath};
use crate::superselection::RuleSet;

use super::{EmissionBranch, EmissionScenario, MeasurementSpec, Postselection, ProtocolError, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Statistics {
    Fermion,
    Boson,
}

/// Worldlines `paths[party][source]` from two emission events to two
/// parties, plus the background potential.
#[derive(Debug, Clone)]
pub struct TwoPartyGeometry {
    pub potential: GaugePotential,
    pub emissions: [SpacetimeEvent; 2],
    pub paths: [[SpacetimePath; 2]; 2],
}

impl TwoPartyGeometry {
    /// Straight worldlines: sources at `y = ±1`, parties at `x = ∓2`,
    /// emission at `t = 0`, arrival at `t = 1`. The loop encloses the z axis.
    pub fn straight(potential: GaugePotential) -> Self {
        let s = [SpacetimeEvent::new(0.0, 0.0, 1.0, 0.0), SpacetimeEvent::new(0.0, 0.0, -1.0, 0.0)];
        let p = [SpacetimeEvent::new(1.0, -2.0, 0.0, 0.0), SpacetimeEvent::new(1.0, 2.0, 0.0, 0.0)];
        let line = |a, b| SpacetimePath::new(vec![a, b]).expect("increasing time");
        Self {
            potential,
            emissions: s,
            paths: [[line(s[0], p[0]), line(s[1], p[0])], [line(s[0], p[1]), line(s[1], p[1])]],
        }
    }

    /// Ring of radius `radius` around a solenoid. Party 0 sits at polar angle
    /// 0, party 1 at `theta`. The first source, at `theta/2 + π`, emits at
    /// `t = 0`; its particle reaches both parties by `t = 1`, before any flux,
    /// and then waits. The second source, at `theta/2`, emits at `t = 3`,
    /// after the flux has settled, and its particle arrives at `t = 4`.
    /// The flux schedule must be zero before `t = 1` and constant after
    /// `t = 3`; the enclosed phase is then `qΦθ/2π`.
    pub fn aharonov_bohm(theta: f64, schedule: FluxSchedule, radius: f64) -> Result<Self, ProtocolError> {
        if !(0.0 < theta && theta < 2.0 * std::f64::consts::PI) {
            return Err(ProtocolError::InvalidScenario(format!("party angle {theta} outside (0, 2π)")));
        }
        let segments = 48;
        let at = |t: f64, angle: f64| SpacetimeEvent::new(t, radius * angle.cos(), radius * angle.sin(), 0.0);
        let sweep = |from: SpacetimeEvent, t: f64, delta: f64| PathBuilder::start(from).sweep(t, delta, segments);
        let pi = std::f64::consts::PI;
        let s0 = at(0.0, theta / 2.0 + pi);
        let s1 = at(3.0, theta / 2.0);
        let to_a0 = sweep(s0, 1.0, pi - theta / 2.0).wait(4.0).build()?;
        let to_b0 = sweep(s0, 1.0, -(pi - theta / 2.0)).wait(4.0).build()?;
        let to_a1 = sweep(s1, 4.0, -theta / 2.0).build()?;
        let to_b1 = sweep(s1, 4.0, theta / 2.0).build()?;
        Ok(Self {
            potential: GaugePotential::Solenoid { schedule },
            emissions: [s0, s1],
            paths: [[to_a0, to_a1], [to_b0, to_b1]],
        })
    }
}

fn scenario_from(
    geom: &TwoPartyGeometry,
    registry: Arc<ModeRegistry>,
    targets: [[usize; 2]; 2],
    betas: [[f64; 2]; 2],
    postselection: Postselection,
) -> EmissionScenario {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sources = (0..2)
        .map(|j| Source {
            emission: geom.emissions[j],
            branches: (0..2)
                .map(|p| EmissionBranch {
                    amplitude: h,
                    beta: betas[p][j],
                    path: geom.paths[p][j].clone(),
                    target: targets[p][j],
                })
                .collect(),
        })
        .collect();
    EmissionScenario {
        registry,
        sources,
        potential: geom.potential.clone(),
        rules: RuleSet::ALL,
        local_ops: Vec::new(),
        measurement: MeasurementSpec { modes: Vec::new(), postselection },
    }
}

/// Identical particles: party `p` has modes `"1"` and `"2"` for the first and
/// second source. Bosons must be uncharged. `betas[party][source]` are the
/// mechanical branch phases.
pub fn two_party_scenario(
    geom: &TwoPartyGeometry,
    statistics: Statistics,
    charge: i32,
    betas: [[f64; 2]; 2],
) -> Result<EmissionScenario, ProtocolError> {
    let species = match statistics {
        Statistics::Fermion => Species::Fermion { charge },
        Statistics::Boson if charge == 0 => Species::Boson,
        Statistics::Boson => return Err(ProtocolError::InvalidScenario("bosons are modelled uncharged".into())),
    };
    let modes = (0..2)
        .flat_map(|p| [ModeDescriptor::new(p, Register::Primary, "1", species), ModeDescriptor::new(p, Register::Primary, "2", species)])
        .collect();
    let reg = Arc::new(ModeRegistry::new(modes, DEFAULT_BOSON_CAP)?);
    let idx = |p, l| reg.index_of(p, Register::Primary, l).expect("registry built above");
    let targets = [[idx(0, "1"), idx(0, "2")], [idx(1, "1"), idx(1, "2")]];
    Ok(scenario_from(geom, reg.clone(), targets, betas, Postselection::OnePerParty))
}

/// Particle/antiparticle pair: the first source emits charge `−q` into modes
/// `"anti"`, the second charge `q` into modes `"particle"`. Every party also
/// owns two photon modes `"k"` and `"k'"`.
pub fn annihilation_scenario(
    geom: &TwoPartyGeometry,
    charge: i32,
    betas: [[f64; 2]; 2],
) -> Result<EmissionScenario, ProtocolError> {
    if charge == 0 {
        return Err(ProtocolError::InvalidScenario("annihilation needs charged particles".into()));
    }
    let mut modes = Vec::new();
    for p in 0..2 {
        modes.push(ModeDescriptor::new(p, Register::Primary, "anti", Species::Fermion { charge: -charge }));
        modes.push(ModeDescriptor::new(p, Register::Primary, "particle", Species::Fermion { charge }));
        modes.push(ModeDescriptor::new(p, Register::Photon, "k", Species::Boson));
        modes.push(ModeDescriptor::new(p, Register::Photon, "k'", Species::Boson));
    }
    let reg = Arc::new(ModeRegistry::new(modes, DEFAULT_BOSON_CAP)?);
    let idx = |p, l| reg.index_of(p, Register::Primary, l).expect("registry built above");
    let targets = [[idx(0, "anti"), idx(0, "particle")], [idx(1, "anti"), idx(1, "particle")]];
    Ok(scenario_from(geom, reg.clone(), targets, betas, Postselection::CoLocatedPairs))
}
