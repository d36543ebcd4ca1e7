//! Runs every bundled scenario file and prints one status line each, the way
//! the `run` subcommand would.

use loopphase::scenario::{run_scenario_file, RunFlags};

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();

    for f in files {
        let name = f.file_stem().unwrap().to_string_lossy().into_owned();
        match run_scenario_file(&f, &RunFlags::default()) {
            Ok(r) => {
                let phases: Vec<String> = r.phases.iter().map(|p| format!("{}={:+.6}", p.label, p.value)).collect();
                println!("{name:30} {:4} {}", if r.passed() { "ok" } else { "FAIL" }, phases.join(" "));
            }
            Err(e) => println!("{name:30} rejected: {e}"),
        }
    }
    println!("\nreport of one file, without the json part:\n");
    let text = run_scenario_file(format!("{dir}/annihilation.scn"), &RunFlags::default()).unwrap().render();
    print!("{}", text.split("---report---").next().unwrap());
}
