//! Phase tomography of a multi-party fermionic state with a shared reference
//! copy.
//!
//! Every primary mode `c_j` gets a reference partner `c̃_j` at the same party.
//! The reference register holds a uniform superposition over the estimated
//! support; a 50/50 transform on each `(c_j, c̃_j)` pair makes outcome
//! `(x, y)`, with primary pattern `x` and reference pattern `y`, interferes the
//! splits `(x, y)` and `(y, x)`:
//!
//! `P_xy = |λ_x + (−1)^{s_xy} e^{iθ} e^{i(φ_y − φ_x)} λ_y|² / (M·2^D)`
//!
//! with `D` the Hamming distance of `x` and `y` and `θ = Σ_{j∈x} α_j −
//! Σ_{j∈y} α_j` from the per-mode transform phases.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::estimation::{sample_stream, wrap_phase, Pattern};
use crate::fock::{beam_splitter, BasisState, ModeDescriptor, ModeRegistry, QuantumState, Register, Species};

use super::{parity_of, ProtocolError};

/// Pure target state: components `(pattern, λ, φ)` over the concatenated
/// primary modes of all parties.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TomographyTarget {
    pub modes_per_party: Vec<usize>,
    pub components: Vec<(Pattern, f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Shots {
    Exact,
    Finite(u64),
}

/// Spanning-tree edge used to transport the phase from `x` to `y`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TomographyEdge {
    pub x: Pattern,
    pub y: Pattern,
    /// `(−1)^{s_xy}`.
    pub sign: i8,
    /// Mode whose reference transform is shifted by π/2 for the sine part.
    pub mode: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TomographyResult {
    pub support: Vec<Pattern>,
    pub amplitudes: Vec<f64>,
    /// Relative to the first support element; least-squares over all
    /// measured pairs when the tree edges are not the only ones.
    pub phases: Vec<f64>,
    /// Tree edges, strongest interference first.
    pub edges: Vec<TomographyEdge>,
    /// Transform settings executed (the all-zero setting included).
    pub settings: usize,
}

impl TomographyResult {
    pub fn phase_of(&self, x: &[u8]) -> Option<f64> {
        self.support.iter().position(|s| s == x).map(|i| self.phases[i])
    }
}

struct Layout {
    registry: Arc<ModeRegistry>,
    primary: Vec<usize>,
    reference: Vec<usize>,
}

fn layout(modes_per_party: &[usize]) -> Result<Layout, ProtocolError> {
    if modes_per_party.is_empty() || modes_per_party.contains(&0) {
        return Err(ProtocolError::InvalidScenario("every party needs at least one mode".into()));
    }
    let s = Species::Fermion { charge: 0 };
    let mut descs = Vec::new();
    let mut labels = Vec::new();
    for (p, &n) in modes_per_party.iter().enumerate() {
        for j in 0..n {
            let l = format!("{j:03}");
            descs.push(ModeDescriptor::new(p, Register::Primary, l.clone(), s));
            descs.push(ModeDescriptor::new(p, Register::Reference, l.clone(), s));
            labels.push((p, l));
        }
    }
    let registry = Arc::new(ModeRegistry::new(descs, crate::fock::DEFAULT_BOSON_CAP)?);
    let primary = labels.iter().map(|(p, l)| registry.index_of(*p, Register::Primary, l).expect("built")).collect();
    let reference = labels.iter().map(|(p, l)| registry.index_of(*p, Register::Reference, l).expect("built")).collect();
    Ok(Layout { registry, primary, reference })
}

fn permutation_sign(seq: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn ones(x: &[u8]) -> impl Iterator<Item = usize> + '_ {
    x.iter().enumerate().filter(|(_, &b)| b == 1).map(|(j, _)| j)
}

fn check_pattern(x: &[u8], len: usize) -> Result<(), ProtocolError> {
    if x.len() != len || x.iter().any(|&b| b > 1) {
        return Err(ProtocolError::InvalidScenario(format!("pattern {x:?} is not a 0/1 pattern of length {len}")));
    }
    Ok(())
}

fn sign_in(lay: &Layout, x: &[u8], y: &[u8]) -> Result<i8, ProtocolError> {
    let n = lay.primary.len();
    check_pattern(x, n)?;
    check_pattern(y, n)?;
    let px = ones(x).count() % 2;
    let py = ones(y).count() % 2;
    if px != py {
        return Err(ProtocolError::SectorMismatch { x: x.to_vec(), y: y.to_vec() });
    }
    let common = (0..n).filter(|&j| x[j] == 1 && y[j] == 1).count();
    let size_y = ones(y).count();
    let seq_a: Vec<usize> = ones(x).map(|j| lay.primary[j]).chain(ones(y).map(|j| lay.reference[j])).collect();
    // Split (y, x) after routing every operator to its (x, y) slot; common
    // modes stay in place.
    let seq_b: Vec<usize> = ones(y)
        .map(|j| if x[j] == 1 { lay.primary[j] } else { lay.reference[j] })
        .chain(ones(x).map(|j| if y[j] == 1 { lay.reference[j] } else { lay.primary[j] }))
        .collect();
    let base = if (common + size_y) % 2 == 0 { 1 } else { -1 };
    Ok(base * permutation_sign(&seq_a) * permutation_sign(&seq_b))
}

/// `(−1)^{s_xy}` for primary patterns `x`, `y` over the concatenated modes of
/// all parties, under the canonical order of the tomography registry.
pub fn compute_interference_sign(modes_per_party: &[usize], x: &[u8], y: &[u8]) -> Result<i8, ProtocolError> {
    sign_in(&layout(modes_per_party)?, x, y)
}

/// `|λ_x + sign·e^{iθ}e^{i(φ_y − φ_x)} λ_y|² / (M·2^D)`.
pub fn interference_probability(
    lambda_x: f64,
    lambda_y: f64,
    phase_x: f64,
    phase_y: f64,
    sign: i8,
    theta: f64,
    support_size: usize,
    hamming: usize,
) -> f64 {
    let z = Complex64::new(lambda_x, 0.0) + Complex64::from_polar(sign as f64 * lambda_y, theta + phase_y - phase_x);
    z.norm_sqr() / (support_size as f64 * 2f64.powi(hamming as i32))
}

fn validate(target: &TomographyTarget, lay: &Layout) -> Result<(), ProtocolError> {
    let n = lay.primary.len();
    if target.components.is_empty() {
        return Err(ProtocolError::InvalidScenario("target has no components".into()));
    }
    let mut seen = BTreeSet::new();
    let mut norm = 0.0;
    for (x, l, ph) in &target.components {
        check_pattern(x, n)?;
        if !seen.insert(x.clone()) {
            return Err(ProtocolError::InvalidScenario(format!("pattern {x:?} listed twice")));
        }
        if !(l.is_finite() && *l >= 0.0 && ph.is_finite()) {
            return Err(ProtocolError::InvalidScenario(format!("bad amplitude for {x:?}")));
        }
        norm += l * l;
    }
    if (norm - 1.0).abs() > super::NORMALIZATION_TOL {
        return Err(ProtocolError::InvalidScenario(format!("amplitudes are not normalized ({norm})")));
    }
    let first = &target.components[0].0;
    for (x, _, _) in &target.components {
        if ones(x).count() % 2 != ones(first).count() % 2 {
            return Err(ProtocolError::SectorMismatch { x: first.clone(), y: x.clone() });
        }
    }
    Ok(())
}

fn full_pattern(lay: &Layout, x: &[u8], y: &[u8]) -> Vec<u8> {
    let mut occ = vec![0u8; lay.registry.len()];
    for j in 0..x.len() {
        occ[lay.primary[j]] = x[j];
        occ[lay.reference[j]] = y[j];
    }
    occ
}

fn observe(dist: BTreeMap<Pattern, f64>, shots: Shots, seed: u64, stream: u64) -> BTreeMap<Pattern, f64> {
    match shots {
        Shots::Exact => dist,
        Shots::Finite(n) => sample_stream(&dist, n, seed, stream)
            .into_iter()
            .map(|(k, c)| (k, c as f64 / n as f64))
            .collect(),
    }
}

/// `(x, y)` is usable when no other pair of support elements produces the
/// same outcome.
fn usable(x: &[u8], y: &[u8], support: &BTreeSet<Pattern>) -> bool {
    for u in support {
        if u.as_slice() == x || u.as_slice() == y {
            continue;
        }
        let mut v = Vec::with_capacity(x.len());
        let mut ok = true;
        for j in 0..x.len() {
            let s = x[j] as i16 + y[j] as i16 - u[j] as i16;
            if !(0..=1).contains(&s) {
                ok = false;
                break;
            }
            v.push(s as u8);
        }
        if ok && support.contains(&v) {
            return false;
        }
    }
    true
}

/// Full four-stage run; the support is estimated from stage one.
pub fn tomography_run(target: &TomographyTarget, shots: Shots, seed: u64) -> Result<TomographyResult, ProtocolError> {
    run(target, None, shots, seed)
}

/// Same as [`tomography_run`] with the reference-state support forced.
pub fn tomography_with_support(
    target: &TomographyTarget,
    support: &[Pattern],
    shots: Shots,
    seed: u64,
) -> Result<TomographyResult, ProtocolError> {
    run(target, Some(support), shots, seed)
}

fn run(
    target: &TomographyTarget,
    forced: Option<&[Pattern]>,
    shots: Shots,
    seed: u64,
) -> Result<TomographyResult, ProtocolError> {
    let lay = layout(&target.modes_per_party)?;
    validate(target, &lay)?;
    let n = lay.primary.len();
    let reg = lay.registry.clone();
    let zeros = vec![0u8; n];

    let psi = QuantumState::from_amplitudes(
        reg.clone(),
        target
            .components
            .iter()
            .map(|(x, l, ph)| (BasisState(full_pattern(&lay, x, &zeros)), Complex64::from_polar(*l, *ph))),
    )?;

    // Stage 1: amplitudes.
    let p1 = observe(psi.measure_occupation(&lay.primary).probabilities(), shots, seed, 0);
    let lambda = |x: &[u8]| p1.get(x).copied().unwrap_or(0.0).sqrt();
    let support: BTreeSet<Pattern> = match forced {
        Some(s) => {
            for x in s {
                check_pattern(x, n)?;
            }
            s.iter().cloned().collect()
        }
        None => {
            let threshold = match shots {
                Shots::Exact => 1e-10,
                Shots::Finite(k) => 3.0 / (k as f64).sqrt(),
            };
            p1.keys().filter(|x| lambda(x) > threshold).cloned().collect()
        }
    };
    if support.is_empty() {
        return Err(ProtocolError::Unsolvable { reached: 0, total: 0 });
    }
    let parity = parity_of(&reg, &BasisState(full_pattern(&lay, support.iter().next().unwrap(), &zeros)));
    for x in &support {
        if parity_of(&reg, &BasisState(full_pattern(&lay, x, &zeros))) != parity {
            return Err(ProtocolError::SectorMismatch { x: support.iter().next().unwrap().clone(), y: x.clone() });
        }
    }
    let m = support.len();
    let list: Vec<Pattern> = support.iter().cloned().collect();

    // Spanning tree over usable pairs, rooted at the smallest pattern, grown
    // along the strongest interference term λ_x λ_y / 2^D first.
    let strength = |a: usize, b: usize| {
        let d = (0..n).filter(|&j| list[a][j] != list[b][j]).count();
        lambda(&list[a]) * lambda(&list[b]) / 2f64.powi(d as i32)
    };
    let mut parent: Vec<Option<usize>> = vec![None; m];
    let mut reached = vec![false; m];
    reached[0] = true;
    let mut order = vec![0usize];
    while order.len() < m {
        let mut best: Option<(f64, usize, usize)> = None;
        for &a in &order {
            for b in 0..m {
                if reached[b] || !usable(&list[a], &list[b], &support) {
                    continue;
                }
                let w = strength(a, b);
                if best.is_none_or(|(bw, _, _)| w > bw) {
                    best = Some((w, a, b));
                }
            }
        }
        let Some((_, a, b)) = best else {
            return Err(ProtocolError::Unsolvable { reached: order.len(), total: m });
        };
        reached[b] = true;
        parent[b] = Some(a);
        order.push(b);
    }
    let first_diff = |a: &[u8], b: &[u8]| (0..n).find(|&j| a[j] != b[j]).expect("distinct patterns");
    let mut setting_modes: Vec<usize> =
        (1..m).map(|b| first_diff(&list[parent[order[b]].unwrap()], &list[order[b]])).collect();
    setting_modes.sort_unstable();
    setting_modes.dedup();

    // Stages 2–4.
    let amp = 1.0 / (m as f64).sqrt();
    let mut terms = Vec::new();
    for (u, _, _) in &target.components {
        let z = psi.amplitude(&BasisState(full_pattern(&lay, u, &zeros)));
        for v in &list {
            let seq: Vec<usize> = ones(u).map(|j| lay.primary[j]).chain(ones(v).map(|j| lay.reference[j])).collect();
            let s = permutation_sign(&seq) as f64;
            terms.push((BasisState(full_pattern(&lay, u, v)), z * amp * s));
        }
    }
    let joint = QuantumState::from_amplitudes(reg.clone(), terms)?;
    let all: Vec<usize> = (0..reg.len()).collect();
    let measure = |shifted: Option<usize>, stream: u64| -> Result<BTreeMap<Pattern, f64>, ProtocolError> {
        let mut st = joint.clone();
        for j in 0..n {
            let alpha = if Some(j) == shifted { std::f64::consts::FRAC_PI_2 } else { 0.0 };
            st = st.apply_linear_mode_transform(&[lay.primary[j], lay.reference[j]], &beam_splitter(alpha))?;
        }
        Ok(observe(st.measure_occupation(&all).probabilities(), shots, seed, stream))
    };
    let base = measure(None, 1)?;

    let sums: BTreeSet<Vec<u8>> =
        list.iter().flat_map(|u| list.iter().map(move |v| (0..n).map(|j| u[j] + v[j]).collect())).collect();
    let unexplained: f64 = base
        .iter()
        .filter(|(o, _)| {
            let s: Vec<u8> = (0..n).map(|j| o[lay.primary[j]] + o[lay.reference[j]]).collect();
            !sums.contains(&s)
        })
        .map(|(_, &w)| w)
        .sum();
    let limit = match shots {
        Shots::Exact => 1e-12,
        Shots::Finite(k) => 3.0 / (k as f64).sqrt(),
    };
    if unexplained > limit {
        return Err(ProtocolError::SupportMisestimate { weight: unexplained });
    }

    let mut shifted: BTreeMap<usize, BTreeMap<Pattern, f64>> = BTreeMap::new();
    for (i, &mode) in setting_modes.iter().enumerate() {
        shifted.insert(mode, measure(Some(mode), 2 + i as u64)?);
    }

    // Phase difference φ_y − φ_x across a usable pair, with its weight, when
    // some shifted setting touches a mode where the patterns differ.
    let edge_phase = |x: &Pattern, y: &Pattern| -> Result<Option<(f64, i8, f64)>, ProtocolError> {
        let sign = sign_in(&lay, x, y)?;
        let hamming = (0..n).filter(|&j| x[j] != y[j]).count();
        let (lx, ly) = (lambda(x), lambda(y));
        let scale = m as f64 * 2f64.powi(hamming as i32);
        // outcomes (x, y) and (y, x) carry the same interference term
        let (kxy, kyx) = (full_pattern(&lay, x, y), full_pattern(&lay, y, x));
        let both = |d: &BTreeMap<Pattern, f64>| {
            0.5 * (d.get(&kxy).copied().unwrap_or(0.0) + d.get(&kyx).copied().unwrap_or(0.0))
        };
        let q0 = both(&base) * scale - lx * lx - ly * ly;
        let mut sin = 0.0;
        let mut count = 0;
        for (&j, d) in &shifted {
            if x[j] != y[j] {
                let q1 = both(d) * scale - lx * lx - ly * ly;
                sin += sign as f64 * q1 * if y[j] == 1 { 1.0 } else { -1.0 };
                count += 1;
            }
        }
        if count == 0 {
            return Ok(None);
        }
        let delta = (sin / count as f64).atan2(sign as f64 * q0);
        // inverse of the shot-noise variance, up to a common factor
        let weight = (lx * lx * ly * ly) / (2f64.powi(hamming as i32) * (lx * lx + ly * ly)).max(f64::MIN_POSITIVE);
        Ok(Some((delta, sign, weight)))
    };

    let mut phases = vec![0.0; m];
    let mut edges = Vec::new();
    for &b in &order[1..] {
        let a = parent[b].expect("tree");
        let (x, y) = (&list[a], &list[b]);
        let (delta, sign, _) = edge_phase(x, y)?.expect("tree modes are shifted");
        phases[b] = wrap_phase(phases[a] + delta);
        edges.push(TomographyEdge { x: x.clone(), y: y.clone(), sign, mode: first_diff(x, y), delta });
    }

    // Weighted least squares over every measured usable pair, linearized
    // around the tree solution.
    if m > 2 {
        let mut lap = DMatrix::<f64>::zeros(m - 1, m - 1);
        let mut rhs = DVector::<f64>::zeros(m - 1);
        let mut redundant = false;
        for a in 0..m {
            for b in a + 1..m {
                if !usable(&list[a], &list[b], &support) {
                    continue;
                }
                let Some((delta, _, w)) = edge_phase(&list[a], &list[b])? else { continue };
                if parent[b] != Some(a) && parent[a] != Some(b) {
                    redundant = true;
                }
                let r = w * wrap_phase(delta - (phases[b] - phases[a]));
                for (i, s) in [(a, -1.0), (b, 1.0)] {
                    if i > 0 {
                        rhs[i - 1] += s * r;
                        lap[(i - 1, i - 1)] += w;
                    }
                }
                if a > 0 {
                    lap[(a - 1, b - 1)] -= w;
                    lap[(b - 1, a - 1)] -= w;
                }
            }
        }
        if redundant {
            if let Some(eps) = lap.cholesky().map(|c| c.solve(&rhs)) {
                for i in 1..m {
                    phases[i] = wrap_phase(phases[i] + eps[i - 1]);
                }
            }
        }
    }
    Ok(TomographyResult {
        amplitudes: list.iter().map(|x| lambda(x)).collect(),
        support: list,
        phases,
        edges,
        settings: 1 + setting_modes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_amplitude() {
        let p = interference_probability(0.6, 0.0, 0.3, 1.0, -1, 0.2, 4, 2);
        assert!((p - 0.36 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn sign_is_symmetric_in_x_and_y() {
        // Exchanging the roles of x and y swaps which split carries the
        // reference particle; both orders give the same parity.
        let a = compute_interference_sign(&[2], &[1, 0], &[0, 1]).unwrap();
        let b = compute_interference_sign(&[2], &[0, 1], &[1, 0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sector_mismatch() {
        assert!(matches!(
            compute_interference_sign(&[2], &[1, 0], &[1, 1]),
            Err(ProtocolError::SectorMismatch { .. })
        ));
    }

    #[test]
    fn two_party_round_trip() {
        let t = TomographyTarget {
            modes_per_party: vec![2, 2],
            components: vec![
                (vec![1, 0, 0, 1], 0.6, 0.0),
                (vec![0, 1, 1, 0], 0.48, 1.1),
                (vec![1, 0, 1, 0], 0.64, -2.3),
            ],
        };
        let r = tomography_run(&t, Shots::Exact, 0).unwrap();
        for (x, _, ph) in &t.components {
            let rel = wrap_phase(ph - t.components.iter().find(|c| c.0 == r.support[0]).unwrap().2);
            assert!(crate::estimation::circular_distance(r.phase_of(x).unwrap(), rel) < 1e-9, "{x:?}");
        }
    }
}
