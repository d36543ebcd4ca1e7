use std::path::{Path, PathBuf};
use std::process::Command;

use loopphase::scenario::{parse_report, run_scenario_file, RunFlags};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_loopphase"))
}

const PASSING: &[&str] = &[
    "two_party_zero_field",
    "two_party_gauge_check",
    "ab_timedependent",
    "annihilation",
    "boson_vacuum_projector",
    "n_party",
    "general_three_party",
    "tomography",
];

// Set UPDATE_GOLDEN=1 to rewrite the stored reports.
#[test]
fn reports_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for name in PASSING {
        let report = run_scenario_file(scenarios().join(format!("{name}.scn")), &RunFlags::default()).unwrap();
        assert!(report.passed(), "{name}: {:?}", report.checks);
        let json = report.to_json() + "\n";
        let golden = scenarios().join("golden").join(format!("{name}.json"));
        if update {
            std::fs::write(&golden, &json).unwrap();
        } else {
            let stored = std::fs::read_to_string(&golden).unwrap_or_else(|_| panic!("missing {}", golden.display()));
            assert_eq!(json, stored, "{name} drifted from its golden report");
        }
    }
}

#[test]
fn run_output_round_trips() {
    let out = bin().arg("run").arg(scenarios().join("two_party_zero_field.scn")).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let report = parse_report(&text).unwrap();
    assert_eq!(report.scenario, "two_party_zero_field");
    assert!((report.phases[0].value - 0.9).abs() < 1e-12);
}

#[test]
fn forbidden_projector_names_the_rule() {
    let file = scenarios().join("forbidden_fermion_projector.scn");
    let out = bin().arg("run").arg(&file).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("parity superselection"), "{err}");

    let out = bin().args(["run", "--enforce-ssr", "off"]).arg(&file).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn sampled_run_is_reproducible() {
    let file = scenarios().join("two_party_zero_field.scn");
    let run = || bin().args(["run", "--shots", "5000", "--seed", "42"]).arg(&file).output().unwrap().stdout;
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let report = parse_report(&String::from_utf8(a).unwrap()).unwrap();
    let e = &report.estimates[0];
    assert!((e.value_rad - 0.9).abs() < 4.0 * e.standard_error_rad);
}

#[test]
fn decompose_three_cycle() {
    let out = bin().args(["decompose", "0,1,2", "1,2,0"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().ends_with("2 brackets\n"));
}

#[test]
fn gauge_check_subcommand_passes() {
    let out = bin()
        .args(["gauge-check", "--chi", "0.5:1,1,0,0;-2:0,0,2,1"])
        .arg(scenarios().join("annihilation.scn"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = parse_report(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report.gauge_check.unwrap().passed);
}

#[test]
fn ab_demo_both_ramps() {
    for ramp in ["linear", "steps"] {
        let out = bin().args(["ab-demo", "--theta", "3*pi/2", "--flux", "0.8", "--ramp", ramp]).output().unwrap();
        assert!(out.status.success());
        let report = parse_report(&String::from_utf8(out.stdout).unwrap()).unwrap();
        assert!((report.phases[0].value - 0.6).abs() < 1e-6);
    }
}

#[test]
fn tomography_rejects_other_protocols() {
    let out = bin().arg("tomography").arg(scenarios().join("n_party.scn")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_report_lines() {
    let dir = std::env::temp_dir().join("loopphase-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.scn");
    std::fs::write(&f, "[scenario]\nname = bad\nprotocol = two_party\n[registry]\nparty A\nmode A sideways 1 fermion\n").unwrap();
    let out = bin().arg("run").arg(&f).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 6"));
}
