//! Brute-force references shared by the integration tests. They use their own
//! state representation and never call into the library's Fock code.

#![allow(dead_code)]

use std::collections::HashMap;

use num_complex::Complex64 as C64;

/// Fermionic Fock space over at most 64 modes; mode `m` is bit `m`, and a
/// basis state is `Π_{m ascending} c†_m |0⟩`.
#[derive(Debug, Clone, Default)]
pub struct Dense {
    pub amps: HashMap<u64, C64>,
}

impl Dense {
    pub fn vacuum() -> Self {
        let mut amps = HashMap::new();
        amps.insert(0, C64::new(1.0, 0.0));
        Self { amps }
    }

    pub fn add(&mut self, mask: u64, a: C64) {
        *self.amps.entry(mask).or_insert(C64::new(0.0, 0.0)) += a;
    }

    /// `c†_m` on a single basis state.
    pub fn create_on(mask: u64, m: usize) -> Option<(u64, f64)> {
        if mask & (1 << m) != 0 {
            return None;
        }
        let below = (mask & ((1u64 << m) - 1)).count_ones();
        Some((mask | (1 << m), if below % 2 == 0 { 1.0 } else { -1.0 }))
    }

    pub fn create(&self, m: usize) -> Self {
        let mut out = Self::default();
        for (&k, &a) in &self.amps {
            if let Some((k2, s)) = Self::create_on(k, m) {
                out.add(k2, a * s);
            }
        }
        out
    }

    pub fn create_combination(&self, terms: &[(usize, C64)]) -> Self {
        let mut out = Self::default();
        for &(m, c) in terms {
            for (k, a) in self.create(m).amps {
                out.add(k, a * c);
            }
        }
        out
    }

    /// `c†_{modes[a]} → Σ_b t[a][b] c†_{modes[b]}`, by rebuilding every basis
    /// state from the vacuum.
    pub fn transform(&self, modes: &[usize], t: &[Vec<C64>]) -> Self {
        let mut out = Self::default();
        for (&k, &a) in &self.amps {
            let mut part = Self::default();
            part.add(0, a);
            for m in (0..64).rev().filter(|m| k & (1 << m) != 0) {
                part = match modes.iter().position(|&x| x == m) {
                    Some(r) => {
                        let terms: Vec<(usize, C64)> = modes.iter().enumerate().map(|(c, &mc)| (mc, t[r][c])).collect();
                        part.create_combination(&terms)
                    }
                    None => part.create(m),
                };
            }
            for (k2, a2) in part.amps {
                out.add(k2, a2);
            }
        }
        out
    }

    pub fn prob(&self, mask: u64) -> f64 {
        self.amps.get(&mask).map_or(0.0, |a| a.norm_sqr())
    }
}

pub fn beam_splitter(phase: f64) -> Vec<Vec<C64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = C64::from_polar(h, phase);
    vec![vec![C64::new(h, 0.0), C64::new(h, 0.0)], vec![e, -e]]
}

/// Determinant by Laplace expansion.
pub fn det(m: &[Vec<C64>]) -> C64 {
    let n = m.len();
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    if n == 1 {
        return m[0][0];
    }
    let mut total = C64::new(0.0, 0.0);
    for c in 0..n {
        let minor: Vec<Vec<C64>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| *v).collect()).collect();
        let s = if c % 2 == 0 { 1.0 } else { -1.0 };
        total += m[0][c] * s * det(&minor);
    }
    total
}
