//! Run reports: prose for people, a JSON block for scripts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::protocols::{ExtractedPhase, InterferenceTerm, TomographyResult};
use crate::superselection::RuleSet;

use super::CliError;

pub const REPORT_OPEN: &str = "---report---";
pub const REPORT_CLOSE: &str = "---end---";

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ResolvedScenario {
    pub parties: Vec<String>,
    /// `party/register/label species`.
    pub modes: Vec<String>,
    pub potential: String,
    pub sources: usize,
    pub rules: RuleSet,
    /// `None` for exact probabilities.
    pub shots: Option<u64>,
    pub seed: u64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReportDistribution {
    pub setting_rad: f64,
    /// Pattern over the measured modes → probability.
    pub outcomes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReportEstimate {
    pub label: String,
    pub value_rad: f64,
    pub standard_error_rad: f64,
    pub log_likelihood: f64,
    pub shots_per_setting: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaugeCheck {
    /// Monomials of χ as `coef:pt,px,py,pz`.
    pub chi: Vec<String>,
    pub max_probability_deviation: f64,
    pub max_phase_deviation_rad: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub protocol: String,
    pub conventions: BTreeMap<String, String>,
    pub resolved: ResolvedScenario,
    pub postselection_probability: Option<f64>,
    /// Exact rational acceptance, `p/q`, where available.
    pub exact_acceptance: Option<String>,
    pub measured_modes: Vec<String>,
    pub distributions: Vec<ReportDistribution>,
    pub phases: Vec<ExtractedPhase>,
    pub estimates: Vec<ReportEstimate>,
    pub interference: Vec<InterferenceTerm>,
    pub tomography: Option<TomographyResult>,
    pub gauge_check: Option<GaugeCheck>,
    pub checks: Vec<Check>,
}

pub fn conventions() -> BTreeMap<String, String> {
    [
        ("phase", "radians, wrapped to (-pi, pi]"),
        ("line_phase", "q * integral of (V dt - A.dl), q in elementary charges"),
        ("flux", "phase units: a charge-q loop around flux F picks up q*F"),
        ("probability", "dimensionless, per postselected run"),
        ("pattern", "occupation numbers of measured_modes, in order"),
        ("time", "arbitrary units; worldlines strictly increase in t"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.gauge_check.as_ref().is_none_or(|g| g.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Prose summary followed by the fenced JSON block.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {} ({})", self.scenario, self.protocol);
        let r = &self.resolved;
        let _ = writeln!(
            s,
            "  {} parties, {} modes, {} sources, potential {}",
            r.parties.len(),
            r.modes.len(),
            r.sources,
            r.potential
        );
        let rules = match (r.rules.enforce_parity, r.rules.enforce_charge) {
            (true, true) => "parity and charge enforced",
            (true, false) => "parity enforced",
            (false, true) => "charge enforced",
            (false, false) => "no superselection enforced",
        };
        let shots = r.shots.map_or("exact probabilities".to_string(), |n| format!("{n} shots per setting"));
        let _ = writeln!(s, "  {rules}; {shots}; seed {}", r.seed);
        if let Some(p) = self.postselection_probability {
            let _ = write!(s, "postselection probability {p:.12}");
            if let Some(e) = &self.exact_acceptance {
                let _ = write!(s, " (exactly {e})");
            }
            let _ = writeln!(s);
        }
        for d in &self.distributions {
            let _ = writeln!(s, "outcomes at setting {:.6} rad:", d.setting_rad);
            for (k, v) in &d.outcomes {
                let _ = writeln!(s, "  {k}  {v:.12}");
            }
        }
        for p in &self.phases {
            let _ = write!(s, "{}: {:.9} rad (predicted {:.9}", p.label, p.value, p.predicted);
            if let Some(l) = p.loop_value {
                let _ = write!(s, ", loop {l:.9}");
            }
            let _ = writeln!(s, ", mechanical {:.9}) from {}", p.mechanical, p.provenance);
        }
        for e in &self.estimates {
            let _ = writeln!(
                s,
                "estimate {}: {:.6} ± {:.6} rad from {} shots per setting",
                e.label, e.value_rad, e.standard_error_rad, e.shots_per_setting
            );
        }
        if !self.interference.is_empty() {
            let _ = writeln!(s, "{} interference terms", self.interference.len());
            for t in self.interference.iter().take(8) {
                let _ = write!(s, "  {:?} vs {:?}: state {:.9}", t.x, t.x_prime, t.state_phase);
                if let Some(l) = t.loop_phase {
                    let _ = write!(s, ", loops {l:.9}");
                }
                let _ = writeln!(s, " ({} brackets)", t.brackets.len());
            }
            if self.interference.len() > 8 {
                let _ = writeln!(s, "  ...");
            }
        }
        if let Some(t) = &self.tomography {
            let _ = writeln!(s, "tomography: {} support patterns, {} settings", t.support.len(), t.settings);
            for ((x, l), p) in t.support.iter().zip(&t.amplitudes).zip(&t.phases) {
                let bits: String = x.iter().map(|b| char::from(b'0' + b)).collect();
                let _ = writeln!(s, "  {bits}  lambda {l:.9}  phase {p:.9}");
            }
        }
        if let Some(g) = &self.gauge_check {
            let _ = writeln!(
                s,
                "gauge check: max probability shift {:.3e}, max phase shift {:.3e} rad, {}",
                g.max_probability_deviation,
                g.max_phase_deviation_rad,
                if g.passed { "pass" } else { "FAIL" }
            );
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "check {}: {:.9} vs {:.9} (|d| = {:.3e}, tol {:.1e}) {}",
                c.name,
                c.value,
                c.expected,
                c.deviation,
                c.tolerance,
                if c.passed { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(s, "{REPORT_OPEN}");
        let _ = writeln!(s, "{}", self.to_json());
        let _ = writeln!(s, "{REPORT_CLOSE}");
        s
    }
}

/// Reads the machine block back from rendered output.
pub fn parse_report(text: &str) -> Result<RunReport, CliError> {
    let start = text.find(REPORT_OPEN).ok_or_else(|| CliError::Report("no report block".into()))?;
    let body = &text[start + REPORT_OPEN.len()..];
    let end = body.find(REPORT_CLOSE).ok_or_else(|| CliError::Report("unterminated report block".into()))?;
    serde_json::from_str(&body[..end]).map_err(|e| CliError::Report(e.to_string()))
}
