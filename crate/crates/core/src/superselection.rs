//! Parity and charge sectors, and admissibility of rank-1 projectors.

use std::fmt;

use crate::fock::{BasisState, ModeRegistry, QuantumState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorLabel {
    /// `(-1)^{total fermion number}`.
    pub parity: i8,
    pub charge: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RuleSet {
    pub enforce_parity: bool,
    pub enforce_charge: bool,
}

impl RuleSet {
    pub const ALL: RuleSet = RuleSet { enforce_parity: true, enforce_charge: true };
    pub const NONE: RuleSet = RuleSet { enforce_parity: false, enforce_charge: false };
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Rule {
    Parity,
    Charge,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Parity => write!(f, "parity superselection"),
            Rule::Charge => write!(f, "charge superselection"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Allowed,
    Forbidden { violated: Rule },
}

pub fn sector_of(registry: &ModeRegistry, basis: &BasisState) -> SectorLabel {
    let mut fermions = 0u32;
    let mut charge = 0i64;
    for (desc, &n) in registry.modes().iter().zip(basis.occupations()) {
        if desc.species.is_fermion() {
            fermions += n as u32;
        }
        charge += desc.species.charge() as i64 * n as i64;
    }
    SectorLabel { parity: if fermions % 2 == 0 { 1 } else { -1 }, charge }
}

/// Checks whether `|φ⟩⟨φ|` is an admissible local observable: its support
/// must sit in a single sector for every enforced rule. Parity is reported
/// first when both rules are violated.
pub fn check_observable(projector: &QuantumState, rules: RuleSet) -> Verdict {
    let reg = projector.registry();
    let mut sectors = projector.amplitudes().keys().map(|b| sector_of(reg, b));
    let Some(first) = sectors.next() else {
        return Verdict::Allowed;
    };
    let (mut parity_mixed, mut charge_mixed) = (false, false);
    for s in sectors {
        parity_mixed |= s.parity != first.parity;
        charge_mixed |= s.charge != first.charge;
    }
    if rules.enforce_parity && parity_mixed {
        Verdict::Forbidden { violated: Rule::Parity }
    } else if rules.enforce_charge && charge_mixed {
        Verdict::Forbidden { violated: Rule::Charge }
    } else {
        Verdict::Allowed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{Ladder, ModeDescriptor, Register, Species};
    use num_complex::Complex64;
    use std::sync::Arc;

    fn single(species: Species) -> Arc<ModeRegistry> {
        Arc::new(ModeRegistry::new(vec![ModeDescriptor::new(0, Register::Primary, "a", species)], 4).unwrap())
    }

    /// `(1 ± a†)|0⟩/√2`
    fn vacuum_superposition(reg: Arc<ModeRegistry>, sign: f64) -> QuantumState {
        let v = QuantumState::vacuum(reg);
        let one = v.apply_ladder(0, Ladder::Create).unwrap();
        v.plus(&one.scaled(Complex64::new(sign, 0.0))).unwrap().normalized()
    }

    #[test]
    fn sectors() {
        let e = Species::Fermion { charge: -1 };
        let p = Species::Fermion { charge: 1 };
        let reg = ModeRegistry::new(
            vec![ModeDescriptor::new(0, Register::Primary, "e", e), ModeDescriptor::new(0, Register::Primary, "p", p)],
            4,
        )
        .unwrap();
        assert_eq!(sector_of(&reg, &BasisState(vec![0, 0])), SectorLabel { parity: 1, charge: 0 });
        assert_eq!(sector_of(&reg, &BasisState(vec![1, 0])), SectorLabel { parity: -1, charge: -1 });
        assert_eq!(sector_of(&reg, &BasisState(vec![1, 1])), SectorLabel { parity: 1, charge: 0 });
    }

    #[test]
    fn vacuum_superposition_needs_uncharged_bosons() {
        for sign in [1.0, -1.0] {
            let f = vacuum_superposition(single(Species::Fermion { charge: 0 }), sign);
            assert_eq!(check_observable(&f, RuleSet::ALL), Verdict::Forbidden { violated: Rule::Parity });
            let q = vacuum_superposition(single(Species::Fermion { charge: -1 }), sign);
            assert_eq!(check_observable(&q, RuleSet::ALL), Verdict::Forbidden { violated: Rule::Parity });
            let rules = RuleSet { enforce_parity: false, enforce_charge: true };
            assert_eq!(check_observable(&q, rules), Verdict::Forbidden { violated: Rule::Charge });
            assert_eq!(check_observable(&f, RuleSet::NONE), Verdict::Allowed);
            let b = vacuum_superposition(single(Species::Boson), sign);
            assert_eq!(check_observable(&b, RuleSet::ALL), Verdict::Allowed);
        }
    }

    #[test]
    fn single_particle_superposition_allowed() {
        let e = Species::Fermion { charge: -1 };
        let reg = Arc::new(
            ModeRegistry::new(
                vec![ModeDescriptor::new(0, Register::Primary, "1", e), ModeDescriptor::new(0, Register::Primary, "2", e)],
                4,
            )
            .unwrap(),
        );
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = QuantumState::vacuum(reg)
            .apply_creation_combination(&[(0, Complex64::new(h, 0.0)), (1, Complex64::new(-h, 0.0))])
            .unwrap();
        assert_eq!(check_observable(&s, RuleSet::ALL), Verdict::Allowed);
    }

    #[test]
    fn photon_pair_projector_allowed() {
        let reg = single(Species::Boson);
        let v = QuantumState::vacuum(reg);
        let pair = v.apply_ladder(0, Ladder::Create).unwrap().apply_ladder(0, Ladder::Create).unwrap();
        let s = v.plus(&pair).unwrap().normalized();
        assert_eq!(check_observable(&s, RuleSet::ALL), Verdict::Allowed);
    }
}
