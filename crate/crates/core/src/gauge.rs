//! Spacetime paths, abelian 4-potentials and their line and loop phases.
//!
//! Units: ħ = c = 1, charges in units of e, flux in units where a charge-1
//! particle encircling flux Φ picks up phase Φ. The phase along a path is
//! `q ∫ (V dt − A·dl)`, i.e. `q ∫ A^μ dx_μ` with signature (+,−,−,−).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const QUADRATURE_REL_TOL: f64 = 1e-13;
pub const QUADRATURE_MAX_DEPTH: u32 = 40;
/// Minimum clearance between a path and the solenoid axis.
pub const AXIS_CLEARANCE: f64 = 1e-9;
pub const CHAIN_TOLERANCE: f64 = 1e-9;
pub const GRADIENT_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("path comes within {distance:e} of the solenoid axis")]
    SingularityOnPath { distance: f64 },
    #[error("adaptive quadrature did not converge within depth {0}")]
    QuadratureNonConvergence(u32),
    #[error("segment chain does not close: gap {gap:e} after segment {after}")]
    OpenChain { after: usize, gap: f64 },
    #[error("supplied gradient disagrees with finite differences by {deviation:e}")]
    InconsistentGradient { deviation: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid flux schedule: {0}")]
    InvalidSchedule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpacetimeEvent {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpacetimeEvent {
    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self { t, x, y, z }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    fn lerp(&self, other: &Self, s: f64) -> Self {
        Self::new(
            self.t + s * (other.t - self.t),
            self.x + s * (other.x - self.x),
            self.y + s * (other.y - self.y),
            self.z + s * (other.z - self.z),
        )
    }

    /// Largest coordinate difference.
    pub fn max_separation(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for SpacetimeEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.t, self.x, self.y, self.z)
    }
}

/// Piecewise-linear worldline with strictly increasing time.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpacetimePath {
    events: Vec<SpacetimeEvent>,
}

impl SpacetimePath {
    pub fn new(events: Vec<SpacetimeEvent>) -> Result<Self, GaugeError> {
        if events.len() < 2 {
            return Err(GaugeError::InvalidPath("a path needs at least two events".into()));
        }
        for e in &events {
            if !e.as_array().iter().all(|v| v.is_finite()) {
                return Err(GaugeError::InvalidPath(format!("non-finite event {e}")));
            }
        }
        for w in events.windows(2) {
            if w[1].t <= w[0].t {
                return Err(GaugeError::InvalidPath(format!(
                    "time must increase strictly ({} -> {})",
                    w[0].t, w[1].t
                )));
            }
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[SpacetimeEvent] {
        &self.events
    }

    pub fn start(&self) -> SpacetimeEvent {
        self.events[0]
    }

    pub fn end(&self) -> SpacetimeEvent {
        *self.events.last().expect("path has events")
    }

    /// Splits segment `index` at fraction `s ∈ (0, 1)`; the split event ends
    /// the first part and starts the second.
    pub fn split_at(&self, index: usize, s: f64) -> Result<(Self, Self), GaugeError> {
        if index + 1 >= self.events.len() || !(0.0 < s && s < 1.0) {
            return Err(GaugeError::InvalidPath("split point outside the path".into()));
        }
        let mid = self.events[index].lerp(&self.events[index + 1], s);
        let mut first = self.events[..=index].to_vec();
        first.push(mid);
        let mut second = vec![mid];
        second.extend_from_slice(&self.events[index + 1..]);
        Ok((Self::new(first)?, Self::new(second)?))
    }
}

/// Builds paths step by step from a starting event.
#[derive(Debug, Clone)]
pub struct PathBuilder {
    events: Vec<SpacetimeEvent>,
}

impl PathBuilder {
    pub fn start(at: SpacetimeEvent) -> Self {
        Self { events: vec![at] }
    }

    fn last(&self) -> SpacetimeEvent {
        *self.events.last().expect("builder has a start")
    }

    pub fn to(mut self, e: SpacetimeEvent) -> Self {
        self.events.push(e);
        self
    }

    /// Stays at the current position until time `t`.
    pub fn wait(self, t: f64) -> Self {
        let l = self.last();
        self.to(SpacetimeEvent::new(t, l.x, l.y, l.z))
    }

    /// Moves around the z axis at the current radius to polar angle `angle`,
    /// arriving at time `t`, as a polyline of `segments` chords.
    pub fn arc(mut self, t: f64, angle: f64, segments: usize) -> Self {
        let l = self.last();
        let r = l.x.hypot(l.y);
        let a0 = l.y.atan2(l.x);
        let n = segments.max(1);
        for k in 1..=n {
            let s = k as f64 / n as f64;
            let a = a0 + s * (angle - a0);
            self.events
                .push(SpacetimeEvent::new(l.t + s * (t - l.t), r * a.cos(), r * a.sin(), l.z));
        }
        self
    }

    /// Like [`arc`](Self::arc) with the target given as a signed angle swept
    /// from the current position (positive is counter-clockwise).
    pub fn sweep(self, t: f64, delta: f64, segments: usize) -> Self {
        let l = self.last();
        let a0 = l.y.atan2(l.x);
        self.arc(t, a0 + delta, segments)
    }

    pub fn build(self) -> Result<SpacetimePath, GaugeError> {
        SpacetimePath::new(self.events)
    }
}

/// Continuous piecewise-linear flux Φ(t), constant outside the breakpoints.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FluxSchedule {
    breakpoints: Vec<(f64, f64)>,
}

impl FluxSchedule {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self, GaugeError> {
        if breakpoints.is_empty() {
            return Err(GaugeError::InvalidSchedule("no breakpoints".into()));
        }
        if breakpoints.iter().any(|(t, f)| !t.is_finite() || !f.is_finite()) {
            return Err(GaugeError::InvalidSchedule("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(GaugeError::InvalidSchedule("breakpoint times must increase".into()));
        }
        Ok(Self { breakpoints })
    }

    pub fn constant(flux: f64) -> Self {
        Self { breakpoints: vec![(0.0, flux)] }
    }

    /// Zero until `t0`, linear up to `flux` at `t1`, constant after.
    pub fn linear_ramp(t0: f64, t1: f64, flux: f64) -> Result<Self, GaugeError> {
        Self::new(vec![(t0, 0.0), (t1, flux)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn flux(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        if t <= bp[0].0 {
            return bp[0].1;
        }
        for w in bp.windows(2) {
            let ((t0, f0), (t1, f1)) = (w[0], w[1]);
            if t <= t1 {
                return f0 + (f1 - f0) * (t - t0) / (t1 - t0);
            }
        }
        bp[bp.len() - 1].1
    }
}

/// Scalar field with an analytic 4-gradient `(∂_t, ∂_x, ∂_y, ∂_z)`.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn value(&self, e: &SpacetimeEvent) -> f64;
    fn gradient(&self, e: &SpacetimeEvent) -> [f64; 4];
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    /// Powers of (t, x, y, z).
    pub powers: [u32; 4],
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    /// Random polynomial with `n_terms` monomials of total degree ≤ `degree`
    /// and coefficients in [-1, 1].
    pub fn random<R: Rng>(rng: &mut R, n_terms: usize, degree: u32) -> Self {
        let terms = (0..n_terms)
            .map(|_| {
                let mut powers = [0u32; 4];
                let mut left = rng.gen_range(0..=degree);
                while left > 0 {
                    powers[rng.gen_range(0..4)] += 1;
                    left -= 1;
                }
                Monomial { coeff: rng.gen_range(-1.0..1.0), powers }
            })
            .collect();
        Self { terms }
    }
}

impl ScalarField for Polynomial {
    fn value(&self, e: &SpacetimeEvent) -> f64 {
        let c = e.as_array();
        self.terms
            .iter()
            .map(|m| m.coeff * (0..4).map(|i| c[i].powi(m.powers[i] as i32)).product::<f64>())
            .sum()
    }

    fn gradient(&self, e: &SpacetimeEvent) -> [f64; 4] {
        let c = e.as_array();
        let mut g = [0.0; 4];
        for m in &self.terms {
            for (d, gd) in g.iter_mut().enumerate() {
                if m.powers[d] == 0 {
                    continue;
                }
                let mut v = m.coeff * m.powers[d] as f64;
                for i in 0..4 {
                    let p = if i == d { m.powers[i] - 1 } else { m.powers[i] };
                    v *= c[i].powi(p as i32);
                }
                *gd += v;
            }
        }
        g
    }
}

#[derive(Debug, Clone)]
pub enum GaugePotential {
    Zero,
    /// Ideal line flux along the z axis, Coulomb gauge (V = 0).
    Solenoid { schedule: FluxSchedule },
    /// `A_μ = ∂_μ χ`.
    PureGauge { chi: Arc<dyn ScalarField> },
    Sum(Vec<GaugePotential>),
}

impl GaugePotential {
    /// Returns `(V, A_x, A_y, A_z)`.
    pub fn evaluate(&self, e: &SpacetimeEvent) -> [f64; 4] {
        match self {
            GaugePotential::Zero => [0.0; 4],
            GaugePotential::Solenoid { schedule } => {
                let r2 = e.x * e.x + e.y * e.y;
                let k = schedule.flux(e.t) / (2.0 * PI * r2);
                // r × ẑ = (y, −x, 0)
                [0.0, k * e.y, -k * e.x, 0.0]
            }
            GaugePotential::PureGauge { chi } => {
                let g = chi.gradient(e);
                [g[0], -g[1], -g[2], -g[3]]
            }
            GaugePotential::Sum(parts) => {
                let mut acc = [0.0; 4];
                for p in parts {
                    let v = p.evaluate(e);
                    for i in 0..4 {
                        acc[i] += v[i];
                    }
                }
                acc
            }
        }
    }

    fn check_clearance(&self, a: &SpacetimeEvent, b: &SpacetimeEvent) -> Result<(), GaugeError> {
        match self {
            GaugePotential::Solenoid { .. } => {
                let d = segment_axis_distance(a, b);
                if d <= AXIS_CLEARANCE {
                    Err(GaugeError::SingularityOnPath { distance: d })
                } else {
                    Ok(())
                }
            }
            GaugePotential::Sum(parts) => parts.iter().try_for_each(|p| p.check_clearance(a, b)),
            _ => Ok(()),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            GaugePotential::Zero => true,
            GaugePotential::Sum(parts) => parts.iter().all(|p| p.is_zero()),
            _ => false,
        }
    }
}

/// Distance in the xy-plane between a segment and the z axis.
fn segment_axis_distance(a: &SpacetimeEvent, b: &SpacetimeEvent) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let s = if len2 == 0.0 { 0.0 } else { (-(a.x * dx + a.y * dy) / len2).clamp(0.0, 1.0) };
    (a.x + s * dx).hypot(a.y + s * dy)
}

fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, GaugeError> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(GaugeError::QuadratureNonConvergence(QUADRATURE_MAX_DEPTH));
    }
    Ok(simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Adaptive Simpson on [0, 1] with relative tolerance. `magnitude` bounds the
/// size of the terms summed into `f`, so an integrand that cancels to
/// rounding noise is not chased below that noise.
fn integrate_unit(f: &dyn Fn(f64) -> f64, magnitude: &dyn Fn(f64) -> f64) -> Result<f64, GaugeError> {
    let (fa, fm, fb) = (f(0.0), f(0.5), f(1.0));
    let whole = (fa + 4.0 * fm + fb) / 6.0;
    // Seed the tolerance from a coarse magnitude estimate.
    let scale = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&s| magnitude(s)).fold(0.0, f64::max);
    let tol = (QUADRATURE_REL_TOL * whole.abs().max(scale)).max(1e-300);
    simpson(f, 0.0, 1.0, fa, fm, fb, whole, tol, QUADRATURE_MAX_DEPTH)
}

/// Phase `q ∫ (V dt − A·dl)` along `path`.
pub fn line_phase(potential: &GaugePotential, path: &SpacetimePath, charge: i32) -> Result<f64, GaugeError> {
    if potential.is_zero() || charge == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for w in path.events().windows(2) {
        let (a, b) = (w[0], w[1]);
        potential.check_clearance(&a, &b)?;
        let d = [b.t - a.t, b.x - a.x, b.y - a.y, b.z - a.z];
        let integrand = |s: f64| {
            let v = potential.evaluate(&a.lerp(&b, s));
            v[0] * d[0] - v[1] * d[1] - v[2] * d[2] - v[3] * d[3]
        };
        let magnitude = |s: f64| {
            let v = potential.evaluate(&a.lerp(&b, s));
            (0..4).map(|i| (v[i] * d[i]).abs()).sum::<f64>()
        };
        total += integrate_unit(&integrand, &magnitude)?;
    }
    Ok(charge as f64 * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Orientation {
    Forward,
    Backward,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Forward => 1.0,
            Orientation::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedSegment {
    pub path: SpacetimePath,
    pub direction: Orientation,
}

impl OrientedSegment {
    pub fn forward(path: SpacetimePath) -> Self {
        Self { path, direction: Orientation::Forward }
    }

    pub fn backward(path: SpacetimePath) -> Self {
        Self { path, direction: Orientation::Backward }
    }

    pub fn start(&self) -> SpacetimeEvent {
        match self.direction {
            Orientation::Forward => self.path.start(),
            Orientation::Backward => self.path.end(),
        }
    }

    pub fn end(&self) -> SpacetimeEvent {
        match self.direction {
            Orientation::Forward => self.path.end(),
            Orientation::Backward => self.path.start(),
        }
    }
}

/// Verifies that consecutive segments chain and the chain closes.
pub fn check_closed(segments: &[OrientedSegment]) -> Result<(), GaugeError> {
    if segments.is_empty() {
        return Ok(());
    }
    for i in 0..segments.len() {
        let next = (i + 1) % segments.len();
        let gap = segments[i].end().max_separation(&segments[next].start());
        if gap > CHAIN_TOLERANCE {
            return Err(GaugeError::OpenChain { after: i, gap });
        }
    }
    Ok(())
}

/// Signed sum of line phases around a closed chain.
pub fn loop_phase(
    potential: &GaugePotential,
    segments: &[OrientedSegment],
    charge: i32,
) -> Result<f64, GaugeError> {
    check_closed(segments)?;
    segments.iter().try_fold(0.0, |acc, s| {
        Ok(acc + s.direction.sign() * line_phase(potential, &s.path, charge)?)
    })
}

/// Closed chain `+γ(n,j) −γ(n,j′) +γ(n′,j′) −γ(n′,j)` through two sources and
/// two parties.
pub fn bipartite_loop(
    n_j: &SpacetimePath,
    n_jp: &SpacetimePath,
    np_jp: &SpacetimePath,
    np_j: &SpacetimePath,
) -> Vec<OrientedSegment> {
    vec![
        OrientedSegment::forward(n_j.clone()),
        OrientedSegment::backward(n_jp.clone()),
        OrientedSegment::forward(np_jp.clone()),
        OrientedSegment::backward(np_j.clone()),
    ]
}

/// Adds the pure-gauge term `∂_μ χ` after spot-checking the supplied gradient
/// against central differences.
pub fn gauge_transformed(
    potential: &GaugePotential,
    chi: Arc<dyn ScalarField>,
) -> Result<GaugePotential, GaugeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a09e);
    let h = 1e-5;
    for _ in 0..8 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let g = chi.gradient(&SpacetimeEvent::from_array(c));
        for d in 0..4 {
            let (mut p, mut m) = (c, c);
            p[d] += h;
            m[d] -= h;
            let fd = (chi.value(&SpacetimeEvent::from_array(p)) - chi.value(&SpacetimeEvent::from_array(m)))
                / (2.0 * h);
            let deviation = (fd - g[d]).abs();
            if deviation > GRADIENT_CHECK_TOL * (1.0 + g[d].abs()) {
                return Err(GaugeError::InconsistentGradient { deviation });
            }
        }
    }
    Ok(GaugePotential::Sum(vec![potential.clone(), GaugePotential::PureGauge { chi }]))
}
