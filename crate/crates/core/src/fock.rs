//! Occupation-number states over a fixed, globally ordered registry of
//! fermionic and bosonic modes.
//!
//! A basis state `|n⟩` is the canonically ordered product
//! `(c†_0)^{n_0} (c†_1)^{n_1} ... |0⟩ / √(Π n_m!)`, so the fermionic sign of
//! a creation on mode `m` is `(-1)^{#occupied fermionic modes below m}`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Amplitudes with modulus below this are dropped from the support.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

pub const DEFAULT_BOSON_CAP: u8 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("mode index {0} is not in the registry")]
    InvalidMode(usize),
    #[error("bosonic occupation of mode {mode} would exceed the cap of {cap}")]
    BosonCapExceeded { mode: usize, cap: u8 },
    #[error("linear transform mixes modes of different species or charge ({0} and {1})")]
    MixedSpeciesTransform(usize, usize),
    #[error("transform matrix is {rows}x{cols} but the mode subset has {modes} entries")]
    NonSquareMatrix { rows: usize, cols: usize, modes: usize },
    #[error("states live on different mode registries")]
    RegistryMismatch,
    #[error("postselection accepted no weight")]
    EmptyPostselection,
    #[error("duplicate mode {party}/{register:?}/{label}")]
    DuplicateMode { party: usize, register: Register, label: String },
    #[error("basis pattern has {got} entries, registry has {expected} modes")]
    PatternLength { got: usize, expected: usize },
    #[error("occupation {occupation} is not allowed on mode {mode}")]
    InvalidOccupation { mode: usize, occupation: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Species {
    /// Charge in units of the elementary charge.
    Fermion { charge: i32 },
    Boson,
}

impl Species {
    pub fn charge(&self) -> i32 {
        match self {
            Species::Fermion { charge } => *charge,
            Species::Boson => 0,
        }
    }

    pub fn is_fermion(&self) -> bool {
        matches!(self, Species::Fermion { .. })
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub enum Register {
    Primary,
    Reference,
    Photon,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModeDescriptor {
    pub party: usize,
    pub label: String,
    pub species: Species,
    pub register: Register,
}

impl ModeDescriptor {
    pub fn new(party: usize, register: Register, label: impl Into<String>, species: Species) -> Self {
        Self { party, label: label.into(), species, register }
    }

    fn sort_key(&self) -> (usize, Register, &str) {
        (self.party, self.register, self.label.as_str())
    }
}

/// Globally ordered list of modes. The order is `(party, register, label)`
/// and never changes after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRegistry {
    modes: Vec<ModeDescriptor>,
    boson_cap: u8,
}

impl ModeRegistry {
    pub fn new(mut modes: Vec<ModeDescriptor>, boson_cap: u8) -> Result<Self, FockError> {
        modes.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        for w in modes.windows(2) {
            if w[0].sort_key() == w[1].sort_key() {
                return Err(FockError::DuplicateMode {
                    party: w[0].party,
                    register: w[0].register,
                    label: w[0].label.clone(),
                });
            }
        }
        Ok(Self { modes, boson_cap: boson_cap.max(1) })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn boson_cap(&self) -> u8 {
        self.boson_cap
    }

    pub fn modes(&self) -> &[ModeDescriptor] {
        &self.modes
    }

    pub fn mode(&self, index: usize) -> Result<&ModeDescriptor, FockError> {
        self.modes.get(index).ok_or(FockError::InvalidMode(index))
    }

    pub fn index_of(&self, party: usize, register: Register, label: &str) -> Option<usize> {
        self.modes
            .binary_search_by(|m| m.sort_key().cmp(&(party, register, label)))
            .ok()
    }

    pub fn parties(&self) -> usize {
        self.modes.iter().map(|m| m.party + 1).max().unwrap_or(0)
    }

    /// Mode indices owned by `party`, in canonical order.
    pub fn modes_of_party(&self, party: usize) -> Vec<usize> {
        (0..self.modes.len()).filter(|&i| self.modes[i].party == party).collect()
    }

    pub fn vacuum(&self) -> BasisState {
        BasisState(vec![0; self.modes.len()])
    }

    pub fn check_basis(&self, basis: &BasisState) -> Result<(), FockError> {
        if basis.0.len() != self.modes.len() {
            return Err(FockError::PatternLength { got: basis.0.len(), expected: self.modes.len() });
        }
        for (mode, (&n, desc)) in basis.0.iter().zip(&self.modes).enumerate() {
            let max = if desc.species.is_fermion() { 1 } else { self.boson_cap };
            if n > max {
                return Err(FockError::InvalidOccupation { mode, occupation: n });
            }
        }
        Ok(())
    }
}

/// Occupation numbers aligned with the registry order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState(pub Vec<u8>);

impl BasisState {
    pub fn occupations(&self) -> &[u8] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    pub fn restrict(&self, modes: &[usize]) -> Vec<u8> {
        modes.iter().map(|&m| self.0[m]).collect()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for n in &self.0 {
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Sparse pure state. Support is pruned at [`PRUNE_THRESHOLD`].
#[derive(Debug, Clone)]
pub struct QuantumState {
    registry: Arc<ModeRegistry>,
    amplitudes: BTreeMap<BasisState, Complex64>,
}

impl QuantumState {
    pub fn vacuum(registry: Arc<ModeRegistry>) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(registry.vacuum(), Complex64::new(1.0, 0.0));
        Self { registry, amplitudes }
    }

    pub fn zero(registry: Arc<ModeRegistry>) -> Self {
        Self { registry, amplitudes: BTreeMap::new() }
    }

    pub fn basis(registry: Arc<ModeRegistry>, basis: BasisState) -> Result<Self, FockError> {
        registry.check_basis(&basis)?;
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(basis, Complex64::new(1.0, 0.0));
        Ok(Self { registry, amplitudes })
    }

    pub fn from_amplitudes(
        registry: Arc<ModeRegistry>,
        terms: impl IntoIterator<Item = (BasisState, Complex64)>,
    ) -> Result<Self, FockError> {
        let mut state = Self::zero(registry);
        for (b, a) in terms {
            state.registry.check_basis(&b)?;
            state.add(b, a);
        }
        state.prune();
        Ok(state)
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn amplitudes(&self) -> &BTreeMap<BasisState, Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, basis: &BasisState) -> Complex64 {
        self.amplitudes.get(basis).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in self.amplitudes.values_mut() {
                *a /= n;
            }
        }
        self
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        for a in self.amplitudes.values_mut() {
            *a *= factor;
        }
        self.prune();
        self
    }

    pub fn plus(mut self, other: &QuantumState) -> Result<Self, FockError> {
        self.same_registry(other)?;
        for (b, a) in &other.amplitudes {
            self.add(b.clone(), *a);
        }
        self.prune();
        Ok(self)
    }

    fn same_registry(&self, other: &QuantumState) -> Result<(), FockError> {
        if Arc::ptr_eq(&self.registry, &other.registry) || *self.registry == *other.registry {
            Ok(())
        } else {
            Err(FockError::RegistryMismatch)
        }
    }

    fn add(&mut self, basis: BasisState, amp: Complex64) {
        *self.amplitudes.entry(basis).or_default() += amp;
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    /// Applies a single creation or annihilation operator. The result may be
    /// unnormalized or zero.
    pub fn apply_ladder(&self, mode: usize, kind: Ladder) -> Result<Self, FockError> {
        let desc = self.registry.mode(mode)?;
        let fermion = desc.species.is_fermion();
        let cap = self.registry.boson_cap;
        let mut out = Self::zero(self.registry.clone());
        for (basis, &amp) in &self.amplitudes {
            let n = basis.0[mode];
            let factor = if fermion {
                let occupied_below = self.registry.modes[..mode]
                    .iter()
                    .zip(&basis.0)
                    .filter(|(d, &k)| d.species.is_fermion() && k == 1)
                    .count();
                let sign = if occupied_below % 2 == 0 { 1.0 } else { -1.0 };
                match kind {
                    Ladder::Create if n == 1 => continue,
                    Ladder::Annihilate if n == 0 => continue,
                    _ => sign,
                }
            } else {
                match kind {
                    Ladder::Create => {
                        if n >= cap {
                            return Err(FockError::BosonCapExceeded { mode, cap });
                        }
                        ((n + 1) as f64).sqrt()
                    }
                    Ladder::Annihilate => {
                        if n == 0 {
                            continue;
                        }
                        (n as f64).sqrt()
                    }
                }
            };
            let mut next = basis.clone();
            match kind {
                Ladder::Create => next.0[mode] += 1,
                Ladder::Annihilate => next.0[mode] -= 1,
            }
            out.add(next, amp * factor);
        }
        out.prune();
        Ok(out)
    }

    /// Applies `Σ_k coeffs[k] · c†_{modes[k]}`.
    pub fn apply_creation_combination(
        &self,
        terms: &[(usize, Complex64)],
    ) -> Result<Self, FockError> {
        let mut out = Self::zero(self.registry.clone());
        for &(mode, coeff) in terms {
            if coeff == Complex64::new(0.0, 0.0) {
                continue;
            }
            let created = self.apply_ladder(mode, Ladder::Create)?;
            for (b, a) in created.amplitudes {
                out.add(b, a * coeff);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Replaces every creation operator on `modes[a]` by
    /// `Σ_b T[a][b] c†_{modes[b]}` and re-expands each basis state.
    pub fn apply_linear_mode_transform(
        &self,
        modes: &[usize],
        transform: &DMatrix<Complex64>,
    ) -> Result<Self, FockError> {
        if transform.nrows() != modes.len() || transform.ncols() != modes.len() {
            return Err(FockError::NonSquareMatrix {
                rows: transform.nrows(),
                cols: transform.ncols(),
                modes: modes.len(),
            });
        }
        let mut position = vec![None; self.registry.len()];
        for (k, &m) in modes.iter().enumerate() {
            let desc = self.registry.mode(m)?;
            let first = self.registry.mode(modes[0])?;
            if desc.species != first.species {
                return Err(FockError::MixedSpeciesTransform(modes[0], m));
            }
            position[m] = Some(k);
        }

        let rows: Vec<Vec<(usize, Complex64)>> = (0..modes.len())
            .map(|a| modes.iter().enumerate().map(|(b, &mb)| (mb, transform[(a, b)])).collect())
            .collect();
        let mut out = Self::zero(self.registry.clone());
        for (basis, &amp) in &self.amplitudes {
            // |b⟩ = Π_{subset} c† |rest⟩ / κ, with the subset operators in
            // canonical order; only those operators are transformed.
            let mut rest = basis.clone();
            let mut ops = Vec::new();
            for &m in modes {
                for _ in 0..basis.0[m] {
                    ops.push(m);
                }
                rest.0[m] = 0;
            }
            ops.sort_unstable();
            let mut probe = Self::zero(self.registry.clone());
            probe.add(rest.clone(), Complex64::new(1.0, 0.0));
            for &m in ops.iter().rev() {
                probe = probe.apply_ladder(m, Ladder::Create)?;
            }
            let kappa = probe.amplitude(basis);

            let mut partial = Self::zero(self.registry.clone());
            partial.add(rest, amp / kappa);
            for &m in ops.iter().rev() {
                let a = position[m].expect("op drawn from subset");
                partial = partial.apply_creation_combination(&rows[a])?;
            }
            for (b, a) in partial.amplitudes {
                out.add(b, a);
            }
        }
        out.prune();
        Ok(out)
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &QuantumState) -> Result<Complex64, FockError> {
        self.same_registry(other)?;
        let (small, large, conj_small) = if self.amplitudes.len() <= other.amplitudes.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in &small.amplitudes {
            if let Some(c) = large.amplitudes.get(b) {
                acc += if conj_small { a.conj() * c } else { c.conj() * a };
            }
        }
        Ok(acc)
    }

    /// Projective occupation-number measurement on `modes`.
    pub fn measure_occupation(&self, modes: &[usize]) -> OutcomeDistribution {
        let total = self.norm_sqr();
        let mut groups: BTreeMap<Vec<u8>, QuantumState> = BTreeMap::new();
        for (b, a) in &self.amplitudes {
            groups
                .entry(b.restrict(modes))
                .or_insert_with(|| QuantumState::zero(self.registry.clone()))
                .add(b.clone(), *a);
        }
        let outcomes = groups
            .into_iter()
            .map(|(pattern, s)| {
                let p = if total > 0.0 { s.norm_sqr() / total } else { 0.0 };
                (pattern, Outcome { probability: p, state: s.normalized() })
            })
            .collect();
        OutcomeDistribution { modes: modes.to_vec(), outcomes }
    }

    /// Keeps the support accepted by `predicate`; returns the renormalized
    /// state and the accepted weight.
    pub fn postselect<F>(&self, predicate: F) -> Result<(QuantumState, f64), FockError>
    where
        F: Fn(&BasisState) -> bool,
    {
        let total = self.norm_sqr();
        let mut kept = Self::zero(self.registry.clone());
        for (b, a) in &self.amplitudes {
            if predicate(b) {
                kept.add(b.clone(), *a);
            }
        }
        let p = if total > 0.0 { kept.norm_sqr() / total } else { 0.0 };
        if kept.is_zero() || p == 0.0 {
            return Err(FockError::EmptyPostselection);
        }
        Ok((kept.normalized(), p))
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub probability: f64,
    /// Normalized post-measurement state.
    pub state: QuantumState,
}

#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    pub modes: Vec<usize>,
    pub outcomes: BTreeMap<Vec<u8>, Outcome>,
}

impl OutcomeDistribution {
    pub fn probability(&self, pattern: &[u8]) -> f64 {
        self.outcomes.get(pattern).map_or(0.0, |o| o.probability)
    }

    pub fn probabilities(&self) -> BTreeMap<Vec<u8>, f64> {
        self.outcomes.iter().map(|(k, o)| (k.clone(), o.probability)).collect()
    }

    pub fn total(&self) -> f64 {
        self.outcomes.values().map(|o| o.probability).sum()
    }
}

/// 50/50 beam splitter `c†_0 → (c†_0 + c†_1)/√2`,
/// `c†_1 → e^{iφ}(c†_0 − c†_1)/√2`.
pub fn beam_splitter(phase: f64) -> DMatrix<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = Complex64::from_polar(h, phase);
    DMatrix::from_row_slice(2, 2, &[Complex64::new(h, 0.0), Complex64::new(h, 0.0), e, -e])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn registry(species: Species, n: usize) -> Arc<ModeRegistry> {
        let modes = (0..n).map(|i| ModeDescriptor::new(i, Register::Primary, "m", species)).collect();
        Arc::new(ModeRegistry::new(modes, DEFAULT_BOSON_CAP).unwrap())
    }

    #[test]
    fn fermion_creation_anticommutes() {
        let reg = registry(Species::Fermion { charge: 0 }, 2);
        let v = QuantumState::vacuum(reg);
        let a = v.apply_ladder(1, Ladder::Create).unwrap().apply_ladder(0, Ladder::Create).unwrap();
        let b = v.apply_ladder(0, Ladder::Create).unwrap().apply_ladder(1, Ladder::Create).unwrap();
        let k = BasisState(vec![1, 1]);
        assert_eq!(a.amplitude(&k), c(1.0, 0.0));
        assert_eq!(b.amplitude(&k), c(-1.0, 0.0));
    }

    #[test]
    fn boson_ladder_factors() {
        let reg = registry(Species::Boson, 1);
        let one = QuantumState::vacuum(reg).apply_ladder(0, Ladder::Create).unwrap();
        assert_eq!(one.amplitude(&BasisState(vec![1])), c(1.0, 0.0));
        let two = one.apply_ladder(0, Ladder::Create).unwrap();
        assert!((two.amplitude(&BasisState(vec![2])).re - 2f64.sqrt()).abs() < 1e-15);
        let down = two.apply_ladder(0, Ladder::Annihilate).unwrap();
        assert!((down.amplitude(&BasisState(vec![1])).re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn boson_cap_is_a_hard_error() {
        let modes = vec![ModeDescriptor::new(0, Register::Primary, "m", Species::Boson)];
        let reg = Arc::new(ModeRegistry::new(modes, 2).unwrap());
        let s = QuantumState::basis(reg, BasisState(vec![2])).unwrap();
        assert_eq!(s.apply_ladder(0, Ladder::Create).unwrap_err(), FockError::BosonCapExceeded {
            mode: 0,
            cap: 2
        });
    }

    #[test]
    fn pauli_exclusion_gives_zero() {
        let reg = registry(Species::Fermion { charge: -1 }, 1);
        let s = QuantumState::basis(reg, BasisState(vec![1])).unwrap();
        assert!(s.apply_ladder(0, Ladder::Create).unwrap().is_zero());
        assert_eq!(s.apply_ladder(3, Ladder::Create).unwrap_err(), FockError::InvalidMode(3));
    }

    #[test]
    fn fermionic_beam_splitter_blocks_double_occupation() {
        let reg = registry(Species::Fermion { charge: 0 }, 2);
        let s = QuantumState::basis(reg, BasisState(vec![1, 1])).unwrap();
        let out = s.apply_linear_mode_transform(&[0, 1], &beam_splitter(0.0)).unwrap();
        assert_eq!(out.amplitudes().len(), 1);
        let a = out.amplitude(&BasisState(vec![1, 1]));
        assert!((a - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn bosonic_beam_splitter_bunches() {
        let reg = registry(Species::Boson, 2);
        let s = QuantumState::basis(reg, BasisState(vec![1, 1])).unwrap();
        let out = s.apply_linear_mode_transform(&[0, 1], &beam_splitter(0.0)).unwrap();
        // (c0+c1)(c0-c1)/2 |0⟩ = (c0² - c1²)/2 |0⟩ = (|20⟩ - |02⟩)/√2
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitude(&BasisState(vec![2, 0])) - c(h, 0.0)).norm() < 1e-14);
        assert!((out.amplitude(&BasisState(vec![0, 2])) - c(-h, 0.0)).norm() < 1e-14);
        assert!(out.amplitude(&BasisState(vec![1, 1])).norm() < 1e-15);
    }

    #[test]
    fn identity_transform_is_noop_and_shape_checked() {
        let reg = registry(Species::Fermion { charge: 1 }, 3);
        let s = QuantumState::from_amplitudes(reg.clone(), [
            (BasisState(vec![1, 0, 1]), c(0.6, 0.0)),
            (BasisState(vec![0, 1, 1]), c(0.0, 0.8)),
        ])
        .unwrap();
        let out = s.apply_linear_mode_transform(&[0, 1, 2], &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(out.amplitudes(), s.amplitudes());
        let err = s.apply_linear_mode_transform(&[0, 1], &DMatrix::identity(3, 3)).unwrap_err();
        assert!(matches!(err, FockError::NonSquareMatrix { .. }));
    }

    #[test]
    fn mixed_species_rejected() {
        let modes = vec![
            ModeDescriptor::new(0, Register::Primary, "e", Species::Fermion { charge: -1 }),
            ModeDescriptor::new(0, Register::Primary, "p", Species::Fermion { charge: 1 }),
        ];
        let reg = Arc::new(ModeRegistry::new(modes, 4).unwrap());
        let s = QuantumState::vacuum(reg);
        let err = s.apply_linear_mode_transform(&[0, 1], &beam_splitter(0.0)).unwrap_err();
        assert_eq!(err, FockError::MixedSpeciesTransform(0, 1));
    }

    #[test]
    fn measurement_and_postselection() {
        let reg = registry(Species::Fermion { charge: 0 }, 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = QuantumState::from_amplitudes(reg.clone(), [
            (BasisState(vec![1, 0]), c(h, 0.0)),
            (BasisState(vec![0, 1]), c(h, 0.0)),
        ])
        .unwrap();
        let d = s.measure_occupation(&[0]);
        assert!((d.probability(&[1]) - 0.5).abs() < 1e-15);
        assert!((d.probability(&[0]) - 0.5).abs() < 1e-15);
        assert!((d.total() - 1.0).abs() < 1e-12);

        let (same, p) = s.postselect(|_| true).unwrap();
        assert_eq!(p, 1.0);
        assert!((same.inner_product(&s).unwrap().re - 1.0).abs() < 1e-15);
        assert_eq!(s.postselect(|_| false).unwrap_err(), FockError::EmptyPostselection);

        let basis = QuantumState::basis(reg, BasisState(vec![0, 1])).unwrap();
        let d = basis.measure_occupation(&[0, 1]);
        assert_eq!(d.outcomes.len(), 1);
        assert_eq!(d.probability(&[0, 1]), 1.0);
    }

    #[test]
    fn inner_products() {
        let reg = registry(Species::Fermion { charge: 0 }, 2);
        let a = QuantumState::basis(reg.clone(), BasisState(vec![1, 0])).unwrap();
        let b = QuantumState::basis(reg.clone(), BasisState(vec![0, 1])).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, 0.0));
        let phased = a.clone().scaled(c(0.0, 1.0));
        assert_eq!(a.inner_product(&phased).unwrap(), c(0.0, 1.0));
        assert_eq!(phased.inner_product(&a).unwrap(), c(0.0, -1.0));
        let other = registry(Species::Boson, 2);
        let d = QuantumState::vacuum(other);
        assert_eq!(a.inner_product(&d).unwrap_err(), FockError::RegistryMismatch);
    }

    #[test]
    fn registry_orders_canonically() {
        let f = Species::Fermion { charge: -1 };
        let reg = ModeRegistry::new(
            vec![
                ModeDescriptor::new(1, Register::Primary, "1", f),
                ModeDescriptor::new(0, Register::Reference, "1", f),
                ModeDescriptor::new(0, Register::Primary, "2", f),
                ModeDescriptor::new(0, Register::Primary, "1", f),
            ],
            4,
        )
        .unwrap();
        assert_eq!(reg.index_of(0, Register::Primary, "1"), Some(0));
        assert_eq!(reg.index_of(0, Register::Primary, "2"), Some(1));
        assert_eq!(reg.index_of(0, Register::Reference, "1"), Some(2));
        assert_eq!(reg.index_of(1, Register::Primary, "1"), Some(3));
        assert_eq!(reg.modes_of_party(0), vec![0, 1, 2]);
        assert!(ModeRegistry::new(
            vec![
                ModeDescriptor::new(0, Register::Primary, "1", f),
                ModeDescriptor::new(0, Register::Primary, "1", f),
            ],
            4
        )
        .is_err());
    }
}
