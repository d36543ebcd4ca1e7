use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use loopphase::gauge::Polynomial;
use loopphase::scenario::{
    ab_demo, decompose_report, gauge_check, load_scenario, parse_chi, run_scenario, CliError, ProtocolKind, Ramp,
    RunFlags, RunReport,
};

#[derive(Parser)]
#[command(name = "loopphase", version, about = "Phase measurements between distant parties, gauge loops included")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum RampArg {
    Linear,
    Steps,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Shots per transform setting; overrides the file.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use exact probabilities instead of sampling.
    #[arg(long)]
    exact: bool,
    /// Enforce parity and charge superselection.
    #[arg(long, value_enum)]
    enforce_ssr: Option<OnOff>,
    /// Tolerance of the consistency checks, in radians.
    #[arg(long)]
    tolerance: Option<f64>,
}

impl RunArgs {
    fn flags(&self) -> RunFlags {
        RunFlags {
            shots: self.shots,
            seed: self.seed,
            exact: self.exact,
            enforce_ssr: self.enforce_ssr.map(|v| matches!(v, OnOff::On)),
            tolerance: self.tolerance,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and print its report.
    Run {
        file: PathBuf,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Loop decomposition of Δφ(x, x′); assignments list the party of every source, comma separated.
    Decompose { x: String, x_prime: String },
    /// Repeat a scenario under a gauge transformation and report the largest shift.
    GaugeCheck {
        file: PathBuf,
        /// χ as `coef:pt,px,py,pz;...`; a random cubic is drawn from --seed when absent.
        #[arg(long)]
        chi: Option<String>,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Run a tomography scenario.
    Tomography {
        file: PathBuf,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Two-party protocol on a ring around a solenoid switched on mid-run.
    AbDemo {
        /// Angle between the parties, radians.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Final flux, in phase units.
        #[arg(long, allow_hyphen_values = true)]
        flux: String,
        #[arg(long, value_enum, default_value = "linear")]
        ramp: RampArg,
        #[arg(long, default_value_t = 1)]
        charge: i32,
    },
}

fn parse_assignment(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<usize>().map_err(|_| CliError::Parse { line: 0, message: format!("bad party index '{t}'") })
        })
        .collect()
}

fn real(s: &str) -> Result<f64, CliError> {
    loopphase::scenario::parse_real(s).map_err(|m| CliError::Parse { line: 0, message: m })
}

fn emit(report: RunReport) -> ExitCode {
    print!("{}", report.render());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        eprintln!("one or more checks failed");
        ExitCode::from(3)
    }
}

fn main_inner(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { file, args } => Ok(emit(run_scenario(&load_scenario(file)?, &args.flags())?)),
        Command::Tomography { file, args } => {
            let f = load_scenario(file)?;
            if f.protocol != ProtocolKind::Tomography {
                return Err(CliError::Validation(format!("'{}' is not a tomography scenario", f.name)));
            }
            Ok(emit(run_scenario(&f, &args.flags())?))
        }
        Command::GaugeCheck { file, chi, args } => {
            let f = load_scenario(file)?;
            let terms = match chi {
                Some(spec) => parse_chi(&spec)?,
                None => {
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(f.execution.seed));
                    Polynomial::random(&mut rng, 6, 3).terms
                }
            };
            Ok(emit(gauge_check(&f, &terms, &args.flags())?))
        }
        Command::Decompose { x, x_prime } => {
            let (_, text) = decompose_report(&parse_assignment(&x)?, &parse_assignment(&x_prime)?)?;
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
        Command::AbDemo { theta, flux, ramp, charge } => {
            let ramp = match ramp {
                RampArg::Linear => Ramp::Linear,
                RampArg::Steps => Ramp::Steps,
            };
            Ok(emit(ab_demo(real(&theta)?, real(&flux)?, ramp, charge)?))
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
