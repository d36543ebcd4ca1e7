//! Reduction of multi-source interference phases to bipartite loops.
//!
//! For two assignments `x`, `x′` of `d` sources to parties with equal
//! per-party counts, `Δφ(x,x′) = Σ_j φ(n_j, j) − φ(n′_j, j)`. A matching
//! permutation `π` with `n′_{π(j)} = n_j` splits the sources into orbits of
//! `⟨π⟩`; an orbit of size `k` contributes `k − 1` brackets
//! `φ(n,j) − φ(n,j′) + φ(n′,j′) − φ(n′,j)`, each a closed loop through two
//! sources and two parties.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::gauge::{bipartite_loop, loop_phase, GaugeError, GaugePotential, SpacetimePath};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("party {party} receives {left} sources in x but {right} in x'")]
    CountMismatch { party: usize, left: usize, right: usize },
    #[error("assignments cover {0} and {1} sources")]
    LengthMismatch(usize, usize),
    #[error("no path for φ{0}")]
    MissingPath(PhaseSymbol),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
}

/// `φ(n, j)`: phase along the path from source `j` to party `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct PhaseSymbol {
    pub party: usize,
    pub source: usize,
}

impl fmt::Display for PhaseSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.party, self.source)
    }
}

/// Source `j` → party `n_j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn sources(&self) -> usize {
        self.0.len()
    }

    pub fn party_of(&self, source: usize) -> usize {
        self.0[source]
    }

    fn sources_at(&self, party: usize) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j] == party).collect()
    }
}

/// `π` as a map over source indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingPermutation(pub Vec<usize>);

impl MatchingPermutation {
    pub fn apply(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Orbits of `⟨π⟩`, each listed as `y, π(y), π²(y), …` starting from its
    /// minimal element, in ascending order of representatives.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for y in 0..self.0.len() {
            if seen[y] {
                continue;
            }
            let mut orbit = vec![y];
            seen[y] = true;
            let mut s = self.0[y];
            while s != y {
                seen[s] = true;
                orbit.push(s);
                s = self.0[s];
            }
            out.push(orbit);
        }
        out
    }
}

/// `φ(n,j) − φ(n,j′) + φ(n′,j′) − φ(n′,j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Bracket {
    pub party: usize,
    pub source: usize,
    pub other_source: usize,
    pub other_party: usize,
}

impl Bracket {
    /// Signed terms in loop order.
    pub fn terms(&self) -> [(PhaseSymbol, i64); 4] {
        let s = |party, source| PhaseSymbol { party, source };
        [
            (s(self.party, self.source), 1),
            (s(self.party, self.other_source), -1),
            (s(self.other_party, self.other_source), 1),
            (s(self.other_party, self.source), -1),
        ]
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[φ({n},{j}) − φ({n},{jp}) + φ({np},{jp}) − φ({np},{j})]",
            n = self.party,
            j = self.source,
            jp = self.other_source,
            np = self.other_party
        )
    }
}

pub type FormalSum = BTreeMap<PhaseSymbol, i64>;

#[derive(Debug, Clone, PartialEq)]
pub struct LoopDecomposition {
    pub permutation: MatchingPermutation,
    pub brackets: Vec<Bracket>,
    pub formal_sum: FormalSum,
}

fn add_term(sum: &mut FormalSum, sym: PhaseSymbol, coeff: i64) {
    let e = sum.entry(sym).or_insert(0);
    *e += coeff;
    if *e == 0 {
        sum.remove(&sym);
    }
}

/// Integer coefficients of `Δφ(x,x′)`.
pub fn delta_phi_formal(x: &Assignment, x_prime: &Assignment) -> Result<FormalSum, LoopError> {
    if x.sources() != x_prime.sources() {
        return Err(LoopError::LengthMismatch(x.sources(), x_prime.sources()));
    }
    let mut sum = FormalSum::new();
    for j in 0..x.sources() {
        add_term(&mut sum, PhaseSymbol { party: x.0[j], source: j }, 1);
        add_term(&mut sum, PhaseSymbol { party: x_prime.0[j], source: j }, -1);
    }
    Ok(sum)
}

/// Finds `π` with `n′_{π(j)} = n_j`. Sources that sit at the same party in
/// both assignments are fixed points; the remaining sources of each party
/// are matched in ascending index order.
pub fn find_matching_permutation(x: &Assignment, x_prime: &Assignment) -> Result<MatchingPermutation, LoopError> {
    if x.sources() != x_prime.sources() {
        return Err(LoopError::LengthMismatch(x.sources(), x_prime.sources()));
    }
    let d = x.sources();
    let parties = x.0.iter().chain(&x_prime.0).map(|&p| p + 1).max().unwrap_or(0);
    let mut pi = vec![usize::MAX; d];
    for party in 0..parties {
        let here = x.sources_at(party);
        let there = x_prime.sources_at(party);
        if here.len() != there.len() {
            return Err(LoopError::CountMismatch { party, left: here.len(), right: there.len() });
        }
        let moved: Vec<usize> = here.iter().copied().filter(|j| x_prime.0[*j] != party).collect();
        let targets: Vec<usize> = there.iter().copied().filter(|j| x.0[*j] != party).collect();
        for &j in &here {
            if x_prime.0[j] == party {
                pi[j] = j;
            }
        }
        for (j, t) in moved.into_iter().zip(targets) {
            pi[j] = t;
        }
    }
    Ok(MatchingPermutation(pi))
}

/// Bracket expansion of `Δφ(x,x′)`. The identity permutation yields no
/// brackets (`Δφ = 0`).
pub fn decompose_phase(x: &Assignment, x_prime: &Assignment) -> Result<LoopDecomposition, LoopError> {
    let pi = find_matching_permutation(x, x_prime)?;
    let n = |j: usize| x.party_of(j);
    let mut brackets = Vec::new();
    for orbit in pi.orbits() {
        let y = orbit[0];
        for l in 0..orbit.len().saturating_sub(1) {
            let (cur, next) = (orbit[l], orbit[l + 1]);
            brackets.push(Bracket { party: n(cur), source: y, other_source: next, other_party: n(next) });
        }
    }
    let mut formal_sum = FormalSum::new();
    for b in &brackets {
        for (sym, c) in b.terms() {
            add_term(&mut formal_sum, sym, c);
        }
    }
    Ok(LoopDecomposition { permutation: pi, brackets, formal_sum })
}

/// Σ over brackets of the bracket's loop phase.
pub fn evaluate_decomposition(
    decomp: &LoopDecomposition,
    paths: &BTreeMap<PhaseSymbol, SpacetimePath>,
    potential: &GaugePotential,
    charge: i32,
) -> Result<f64, LoopError> {
    decomp.brackets.iter().try_fold(0.0, |acc, b| Ok(acc + bracket_phase(b, paths, potential, charge)?))
}

pub fn bracket_phase(
    b: &Bracket,
    paths: &BTreeMap<PhaseSymbol, SpacetimePath>,
    potential: &GaugePotential,
    charge: i32,
) -> Result<f64, LoopError> {
    let get = |sym: PhaseSymbol| paths.get(&sym).ok_or(LoopError::MissingPath(sym));
    let [(a, _), (bb, _), (c, _), (d, _)] = b.terms();
    let chain = bipartite_loop(get(a)?, get(bb)?, get(c)?, get(d)?);
    Ok(loop_phase(potential, &chain, charge)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_gives_no_brackets() {
        let x = Assignment(vec![0, 1, 1, 2]);
        let d = decompose_phase(&x, &x).unwrap();
        assert!(d.permutation.is_identity());
        assert!(d.brackets.is_empty());
        assert!(d.formal_sum.is_empty());
    }

    #[test]
    fn three_party_cycle() {
        // x: 1→A, 2→B, 3→C ; x′: 3→A, 1→B, 2→C (zero-based below)
        let x = Assignment(vec![0, 1, 2]);
        let xp = Assignment(vec![1, 2, 0]);
        let d = decompose_phase(&x, &xp).unwrap();
        assert_eq!(d.permutation, MatchingPermutation(vec![2, 0, 1]));
        assert_eq!(d.brackets.len(), 2);
        assert_eq!(d.formal_sum, delta_phi_formal(&x, &xp).unwrap());
    }

    #[test]
    fn count_mismatch() {
        let err = decompose_phase(&Assignment(vec![0, 0]), &Assignment(vec![0, 1])).unwrap_err();
        assert!(matches!(err, LoopError::CountMismatch { .. }));
    }

    fn counts_preserving_pair() -> impl Strategy<Value = (Assignment, Assignment)> {
        (2usize..=10, 1usize..=6).prop_flat_map(|(d, n)| {
            (proptest::collection::vec(0..n, d), Just((0..d).collect::<Vec<usize>>()).prop_shuffle())
                .prop_map(|(x, perm)| {
                    let xp = perm.iter().map(|&j| x[j]).collect();
                    (Assignment(x), Assignment(xp))
                })
        })
    }

    proptest! {
        #[test]
        fn brackets_reproduce_delta_phi((x, xp) in counts_preserving_pair()) {
            let d = decompose_phase(&x, &xp).unwrap();
            prop_assert_eq!(&d.formal_sum, &delta_phi_formal(&x, &xp).unwrap());
            for j in 0..x.sources() {
                prop_assert_eq!(xp.party_of(d.permutation.apply(j)), x.party_of(j));
            }
            let expected: usize = d.permutation.orbits().iter().map(|o| o.len() - 1).sum();
            prop_assert_eq!(d.brackets.len(), expected);
            for b in &d.brackets {
                prop_assert_ne!(b.party, b.other_party);
                prop_assert_ne!(b.source, b.other_source);
            }
        }

        #[test]
        fn any_orbit_representative_works((x, xp) in counts_preserving_pair(), shift in 0usize..10) {
            let pi = find_matching_permutation(&x, &xp).unwrap();
            let mut sum = FormalSum::new();
            for orbit in pi.orbits() {
                let k = orbit.len();
                let rot: Vec<usize> = (0..k).map(|i| orbit[(i + shift) % k]).collect();
                for l in 0..k.saturating_sub(1) {
                    let b = Bracket { party: x.party_of(rot[l]), source: rot[0], other_source: rot[l + 1], other_party: x.party_of(rot[l + 1]) };
                    for (s, c) in b.terms() { add_term(&mut sum, s, c); }
                }
            }
            prop_assert_eq!(sum, delta_phi_formal(&x, &xp).unwrap());
        }
    }
}
