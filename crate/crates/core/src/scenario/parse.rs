//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! [scenario]
//! name = two_party_zero_field
//! protocol = two_party
//! settings = 0, pi/4
//!
//! [registry]
//! party A
//! party B
//! mode A primary 1 fermion -1
//!
//! [potential]
//! kind = solenoid
//! flux 1 0
//! flux 2 2*pi
//!
//! [source]
//! emit 0 0 1 0
//! branch A:1 sqrt(1/2) 0
//! to 1 -2 0 0
//! ```
//!
//! Reals accept `+ - * /`, parentheses, `pi` and `sqrt(..)`.

use std::str::FromStr;

use num_complex::Complex64;

use crate::fock::Register;
use crate::gauge::{Monomial, SpacetimeEvent};
use crate::protocols::Postselection;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    TwoParty,
    Annihilation,
    NParty,
    General,
    VacuumProjector,
    Tomography,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::TwoParty => "two_party",
            ProtocolKind::Annihilation => "annihilation",
            ProtocolKind::NParty => "n_party",
            ProtocolKind::General => "general",
            ProtocolKind::VacuumProjector => "vacuum_projector",
            ProtocolKind::Tomography => "tomography",
        }
    }
}

/// `party:label`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRef {
    pub party: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeLine {
    pub party: String,
    pub register: Register,
    pub label: String,
    pub fermion: bool,
    pub charge: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Solenoid { breakpoints: Vec<(f64, f64)> },
    PureGauge { terms: Vec<Monomial> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathStep {
    To(SpacetimeEvent),
    Wait(f64),
    /// Absolute polar angle.
    Arc { t: f64, angle: f64, segments: usize },
    /// Signed angle swept from the current position.
    Sweep { t: f64, delta: f64, segments: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchSpec {
    pub target: ModeRef,
    pub amplitude: f64,
    pub beta: f64,
    pub steps: Vec<PathStep>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub emission: Option<SpacetimeEvent>,
    pub branches: Vec<BranchSpec>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalOpSpec {
    pub party: String,
    pub modes: Vec<ModeRef>,
    pub rows: Vec<Vec<Complex64>>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionSpec {
    /// `None` means exact probabilities.
    pub shots: Option<u64>,
    pub seed: u64,
    pub enforce_parity: bool,
    pub enforce_charge: bool,
    pub tolerance: f64,
}

impl Default for ExecutionSpec {
    fn default() -> Self {
        Self { shots: None, seed: 0, enforce_parity: true, enforce_charge: true, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographySpec {
    pub modes_per_party: Vec<usize>,
    pub components: Vec<(Vec<u8>, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub name: String,
    pub protocol: ProtocolKind,
    pub settings: Vec<f64>,
    pub boson_cap: u8,
    pub parties: Vec<String>,
    pub modes: Vec<ModeLine>,
    pub potential: PotentialSpec,
    pub sources: Vec<SourceSpec>,
    pub local_ops: Vec<LocalOpSpec>,
    pub measured: Vec<ModeRef>,
    pub postselection: Postselection,
    pub sites: Vec<Vec<ModeRef>>,
    pub n_party_phases: Vec<f64>,
    pub tomography: Option<TomographySpec>,
    pub execution: ExecutionSpec,
    pub gauge_check: Option<Vec<Monomial>>,
}

fn err(line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { line, message: message.into() }
}

/// Evaluates a real-valued expression.
pub fn parse_real(s: &str) -> Result<f64, String> {
    struct P<'a> {
        b: &'a [u8],
        i: usize,
    }
    impl P<'_> {
        fn ws(&mut self) {
            while self.i < self.b.len() && self.b[self.i].is_ascii_whitespace() {
                self.i += 1;
            }
        }
        fn eat(&mut self, c: u8) -> bool {
            self.ws();
            if self.i < self.b.len() && self.b[self.i] == c {
                self.i += 1;
                true
            } else {
                false
            }
        }
        fn expr(&mut self) -> Result<f64, String> {
            let mut v = self.term()?;
            loop {
                if self.eat(b'+') {
                    v += self.term()?;
                } else if self.eat(b'-') {
                    v -= self.term()?;
                } else {
                    return Ok(v);
                }
            }
        }
        fn term(&mut self) -> Result<f64, String> {
            let mut v = self.unary()?;
            loop {
                if self.eat(b'*') {
                    v *= self.unary()?;
                } else if self.eat(b'/') {
                    v /= self.unary()?;
                } else {
                    return Ok(v);
                }
            }
        }
        fn unary(&mut self) -> Result<f64, String> {
            if self.eat(b'-') {
                return Ok(-self.unary()?);
            }
            if self.eat(b'+') {
                return self.unary();
            }
            self.atom()
        }
        fn atom(&mut self) -> Result<f64, String> {
            self.ws();
            if self.eat(b'(') {
                let v = self.expr()?;
                return if self.eat(b')') { Ok(v) } else { Err("missing ')'".into()) };
            }
            let rest = &self.b[self.i..];
            if rest.starts_with(b"pi") {
                self.i += 2;
                return Ok(std::f64::consts::PI);
            }
            if rest.starts_with(b"sqrt") {
                self.i += 4;
                if !self.eat(b'(') {
                    return Err("expected '(' after sqrt".into());
                }
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err("missing ')'".into());
                }
                return Ok(v.sqrt());
            }
            let start = self.i;
            while self.i < self.b.len() {
                let c = self.b[self.i];
                let exp_sign = (c == b'-' || c == b'+')
                    && self.i > start
                    && matches!(self.b[self.i - 1], b'e' | b'E');
                if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                    self.i += 1;
                } else {
                    break;
                }
            }
            let tok = std::str::from_utf8(&self.b[start..self.i]).expect("ascii");
            tok.parse::<f64>().map_err(|_| format!("cannot read a number at '{}'", String::from_utf8_lossy(&self.b[start..])))
        }
    }
    let mut p = P { b: s.as_bytes(), i: 0 };
    let v = p.expr()?;
    p.ws();
    if p.i != p.b.len() {
        return Err(format!("trailing input in '{s}'"));
    }
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

fn real(line: usize, s: &str) -> Result<f64, CliError> {
    parse_real(s).map_err(|m| err(line, m))
}

fn integer<T: FromStr>(line: usize, s: &str) -> Result<T, CliError> {
    s.trim().parse::<T>().map_err(|_| err(line, format!("expected an integer, got '{s}'")))
}

fn boolean(line: usize, s: &str) -> Result<bool, CliError> {
    match s.trim() {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        other => Err(err(line, format!("expected on/off, got '{other}'"))),
    }
}

fn complex(line: usize, s: &str) -> Result<Complex64, CliError> {
    if let Ok(v) = parse_real(s) {
        return Ok(Complex64::new(v, 0.0));
    }
    Complex64::from_str(s).map_err(|_| err(line, format!("cannot read complex number '{s}'")))
}

fn list(line: usize, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| real(line, t)).collect()
}

fn mode_ref(line: usize, s: &str) -> Result<ModeRef, CliError> {
    let (party, label) = s.split_once(':').ok_or_else(|| err(line, format!("expected party:label, got '{s}'")))?;
    Ok(ModeRef { party: party.to_string(), label: label.to_string() })
}

fn event(line: usize, args: &[&str]) -> Result<SpacetimeEvent, CliError> {
    if args.len() != 4 {
        return Err(err(line, "an event needs t x y z"));
    }
    Ok(SpacetimeEvent::new(real(line, args[0])?, real(line, args[1])?, real(line, args[2])?, real(line, args[3])?))
}

fn monomial(line: usize, args: &[&str]) -> Result<Monomial, CliError> {
    if args.len() != 5 {
        return Err(err(line, "a term needs coef pt px py pz"));
    }
    Ok(Monomial {
        coeff: real(line, args[0])?,
        powers: [integer(line, args[1])?, integer(line, args[2])?, integer(line, args[3])?, integer(line, args[4])?],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Scenario,
    Registry,
    Potential,
    Source,
    LocalOp,
    Measurement,
    Sites,
    NParty,
    Tomography,
    Execution,
    GaugeCheck,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, CliError> {
    let mut f = ScenarioFile {
        name: String::new(),
        protocol: ProtocolKind::TwoParty,
        settings: Vec::new(),
        boson_cap: crate::fock::DEFAULT_BOSON_CAP,
        parties: Vec::new(),
        modes: Vec::new(),
        potential: PotentialSpec::Zero,
        sources: Vec::new(),
        local_ops: Vec::new(),
        measured: Vec::new(),
        postselection: Postselection::None,
        sites: Vec::new(),
        n_party_phases: Vec::new(),
        tomography: None,
        execution: ExecutionSpec::default(),
        gauge_check: None,
    };
    let mut protocol_seen = false;
    let mut potential_kind: Option<String> = None;
    let mut flux = Vec::new();
    let mut terms = Vec::new();
    let mut section = Section::None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or_else(|| err(line, "unterminated section header"))?;
            let mut words = inner.split_whitespace();
            let head = words.next().unwrap_or("");
            let arg = words.next();
            section = match head {
                "scenario" => Section::Scenario,
                "registry" => Section::Registry,
                "potential" => Section::Potential,
                "source" => {
                    f.sources.push(SourceSpec { emission: None, branches: Vec::new(), line });
                    Section::Source
                }
                "local_op" => {
                    let party = arg.ok_or_else(|| err(line, "local_op needs a party name"))?;
                    f.local_ops.push(LocalOpSpec { party: party.into(), modes: Vec::new(), rows: Vec::new(), line });
                    Section::LocalOp
                }
                "measurement" => Section::Measurement,
                "sites" => Section::Sites,
                "n_party" => Section::NParty,
                "tomography" => {
                    f.tomography = Some(TomographySpec { modes_per_party: Vec::new(), components: Vec::new() });
                    Section::Tomography
                }
                "execution" => Section::Execution,
                "gauge_check" => {
                    f.gauge_check = Some(Vec::new());
                    Section::GaugeCheck
                }
                other => return Err(err(line, format!("unknown section '{other}'"))),
            };
            continue;
        }

        if let Some((key, value)) = content.split_once('=') {
            let (key, value) = (key.trim(), value.trim());
            match (section, key) {
                (Section::Scenario, "name") => f.name = value.to_string(),
                (Section::Scenario, "protocol") => {
                    protocol_seen = true;
                    f.protocol = match value {
                        "two_party" => ProtocolKind::TwoParty,
                        "annihilation" => ProtocolKind::Annihilation,
                        "n_party" => ProtocolKind::NParty,
                        "general" => ProtocolKind::General,
                        "vacuum_projector" => ProtocolKind::VacuumProjector,
                        "tomography" => ProtocolKind::Tomography,
                        other => return Err(err(line, format!("unknown protocol '{other}'"))),
                    }
                }
                (Section::Scenario, "settings") => f.settings = list(line, value)?,
                (Section::Registry, "boson_cap") => f.boson_cap = integer(line, value)?,
                (Section::Potential, "kind") => potential_kind = Some(value.to_string()),
                (Section::Measurement, "postselect") => {
                    f.postselection = match value {
                        "none" => Postselection::None,
                        "one_per_party" => Postselection::OnePerParty,
                        "distinct_parties" => Postselection::DistinctParties,
                        "co_located_pairs" => Postselection::CoLocatedPairs,
                        other => return Err(err(line, format!("unknown postselection '{other}'"))),
                    }
                }
                (Section::NParty, "phases") => f.n_party_phases = list(line, value)?,
                (Section::Tomography, "modes_per_party") => {
                    let t = f.tomography.as_mut().expect("section opened");
                    t.modes_per_party =
                        value.split(',').map(|v| integer(line, v)).collect::<Result<Vec<usize>, _>>()?;
                }
                (Section::Execution, "shots") => {
                    f.execution.shots = if value == "exact" { None } else { Some(integer(line, value)?) }
                }
                (Section::Execution, "seed") => f.execution.seed = integer(line, value)?,
                (Section::Execution, "enforce_parity") => f.execution.enforce_parity = boolean(line, value)?,
                (Section::Execution, "enforce_charge") => f.execution.enforce_charge = boolean(line, value)?,
                (Section::Execution, "tolerance") => f.execution.tolerance = real(line, value)?,
                _ => return Err(err(line, format!("unexpected key '{key}' here"))),
            }
            continue;
        }

        let words: Vec<&str> = content.split_whitespace().collect();
        let (head, args) = (words[0], &words[1..]);
        match (section, head) {
            (Section::Registry, "party") => {
                let name = args.first().ok_or_else(|| err(line, "party needs a name"))?;
                if f.parties.iter().any(|p| p == name) {
                    return Err(err(line, format!("party '{name}' declared twice")));
                }
                f.parties.push(name.to_string());
            }
            (Section::Registry, "mode") => {
                if args.len() < 4 {
                    return Err(err(line, "mode needs: party register label species [charge]"));
                }
                let register = match args[1] {
                    "primary" => Register::Primary,
                    "reference" => Register::Reference,
                    "photon" => Register::Photon,
                    other => return Err(err(line, format!("unknown register '{other}'"))),
                };
                let (fermion, charge) = match (args[3], args.get(4)) {
                    ("fermion", Some(q)) => (true, integer(line, q)?),
                    ("fermion", None) => (true, 0),
                    ("boson", None) => (false, 0),
                    ("boson", Some(_)) => return Err(err(line, "bosonic modes are uncharged")),
                    (other, _) => return Err(err(line, format!("unknown species '{other}'"))),
                };
                if !f.parties.iter().any(|p| p == args[0]) {
                    return Err(err(line, format!("undeclared party '{}'", args[0])));
                }
                f.modes.push(ModeLine { party: args[0].into(), register, label: args[2].into(), fermion, charge });
            }
            (Section::Potential, "flux") => {
                if args.len() != 2 {
                    return Err(err(line, "flux needs t value"));
                }
                flux.push((real(line, args[0])?, real(line, args[1])?));
            }
            (Section::Potential, "term") => terms.push(monomial(line, args)?),
            (Section::Source, "emit") => f.sources.last_mut().expect("opened").emission = Some(event(line, args)?),
            (Section::Source, "branch") => {
                if args.len() != 3 {
                    return Err(err(line, "branch needs party:label amplitude beta"));
                }
                let b = BranchSpec {
                    target: mode_ref(line, args[0])?,
                    amplitude: real(line, args[1])?,
                    beta: real(line, args[2])?,
                    steps: Vec::new(),
                    line,
                };
                f.sources.last_mut().expect("opened").branches.push(b);
            }
            (Section::Source, "to" | "wait" | "arc" | "sweep") => {
                let step = match head {
                    "to" => PathStep::To(event(line, args)?),
                    "wait" if args.len() == 1 => PathStep::Wait(real(line, args[0])?),
                    "arc" | "sweep" if args.len() == 3 => {
                        let (t, a, n) = (real(line, args[0])?, real(line, args[1])?, integer(line, args[2])?);
                        if head == "arc" {
                            PathStep::Arc { t, angle: a, segments: n }
                        } else {
                            PathStep::Sweep { t, delta: a, segments: n }
                        }
                    }
                    _ => return Err(err(line, format!("wrong number of arguments to '{head}'"))),
                };
                let src = f.sources.last_mut().expect("opened");
                let b = src.branches.last_mut().ok_or_else(|| err(line, "path step before any branch"))?;
                b.steps.push(step);
            }
            (Section::LocalOp, "modes") => {
                let op = f.local_ops.last_mut().expect("opened");
                op.modes = args.iter().map(|a| mode_ref(line, a)).collect::<Result<_, _>>()?;
            }
            (Section::LocalOp, "row") => {
                let op = f.local_ops.last_mut().expect("opened");
                op.rows.push(args.iter().map(|a| complex(line, a)).collect::<Result<_, _>>()?);
            }
            (Section::Measurement, "modes") => {
                f.measured = args.iter().map(|a| mode_ref(line, a)).collect::<Result<_, _>>()?;
            }
            (Section::Sites, "site") => {
                f.sites.push(args.iter().map(|a| mode_ref(line, a)).collect::<Result<_, _>>()?);
            }
            (Section::Tomography, "component") => {
                if args.len() != 3 {
                    return Err(err(line, "component needs pattern lambda phase"));
                }
                let pattern = args[0]
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        _ => Err(err(line, format!("pattern '{}' must be 0/1 digits", args[0]))),
                    })
                    .collect::<Result<Vec<u8>, _>>()?;
                let t = f.tomography.as_mut().expect("opened");
                t.components.push((pattern, real(line, args[1])?, real(line, args[2])?));
            }
            (Section::GaugeCheck, "term") => f.gauge_check.as_mut().expect("opened").push(monomial(line, args)?),
            _ => return Err(err(line, format!("unexpected directive '{head}' here"))),
        }
    }

    if !protocol_seen {
        return Err(err(0, "missing 'protocol' in [scenario]"));
    }
    if f.name.is_empty() {
        return Err(err(0, "missing 'name' in [scenario]"));
    }
    f.potential = match potential_kind.as_deref() {
        None | Some("zero") => PotentialSpec::Zero,
        Some("solenoid") => {
            if flux.is_empty() {
                return Err(err(0, "solenoid potential needs flux breakpoints"));
            }
            PotentialSpec::Solenoid { breakpoints: flux }
        }
        Some("pure_gauge") => PotentialSpec::PureGauge { terms },
        Some(other) => return Err(err(0, format!("unknown potential kind '{other}'"))),
    };
    for s in &f.sources {
        if s.emission.is_none() {
            return Err(err(s.line, "source without an 'emit' line"));
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(parse_real("3").unwrap(), 3.0);
        assert!((parse_real("-3*pi/4").unwrap() + 0.75 * std::f64::consts::PI).abs() < 1e-15);
        assert!((parse_real("sqrt(1/2)").unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(parse_real("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_real("2.5e+2").unwrap(), 250.0);
        assert!(parse_real("pi pi").is_err());
        assert!(parse_real("1/0").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "[scenario]\nname = x\nprotocol = two_party\n\n[registry]\nparty A\nmode B primary 1 fermion\n";
        match parse_scenario(text) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }
}
