use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tmjc::scenario::{find_preset, parse_config, presets, run_scenario, Observable, Run, Scenario};
use tmjc::verify::{run_suites, SUITES};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_UNKNOWN_PRESET: u8 = 2;
const EXIT_UNWRITABLE_DIR: u8 = 3;
const EXIT_INVALID_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(
    name = "tmjc",
    about = "Two-mode multiphoton Jaynes-Cummings simulator for Schroedinger-cat fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named preset or a config file and emit CSV data
    Run(RunArgs),
    /// Run the self-verification suites
    Verify(VerifyArgs),
    /// List the available presets
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name (see `tmjc list`)
    #[arg(required_unless_present = "config", conflicts_with = "config")]
    preset: Option<String>,
    /// Flat key = value config file instead of a preset
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV files
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Comma-separated snapshot times; overrides the scenario's own times
    /// for snapshot observables and adds phase-distribution snapshots to
    /// config-file runs
    #[arg(long, value_delimiter = ',')]
    snapshot: Option<Vec<f64>>,
    /// Also write a gnuplot companion script
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restrict to one suite
    #[arg(long, value_parser = SUITES)]
    only: Option<String>,
    /// Tolerance profile
    #[arg(long, value_enum, default_value_t = TolProfile::Default)]
    tol: TolProfile,
}

#[derive(Clone, Copy, ValueEnum)]
enum TolProfile {
    /// Published tolerances
    Default,
    /// Five times tighter
    Strict,
    /// Ten times looser
    Loose,
}

impl TolProfile {
    fn scale(self) -> f64 {
        match self {
            TolProfile::Default => 1.0,
            TolProfile::Strict => 0.2,
            TolProfile::Loose => 10.0,
        }
    }
}

fn ensure_writable(dir: &PathBuf) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let probe = dir.join(".tmjc-write-probe");
    fs::write(&probe, b"").map_err(|e| format!("cannot write in {}: {e}", dir.display()))?;
    let _ = fs::remove_file(&probe);
    Ok(())
}

fn run_command(args: RunArgs) -> ExitCode {
    let scenario = if let Some(path) = &args.config {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_INVALID_CONFIG);
            }
        };
        match parse_config(&text) {
            Ok((config, times)) => {
                let mut observables = vec![
                    Observable::Inversion,
                    Observable::PhaseVariances,
                    Observable::PhotonVariances,
                    Observable::WignerOrigin,
                ];
                if args.snapshot.is_some() {
                    observables.push(Observable::Phase1d);
                }
                Scenario {
                    name: "custom",
                    description: "user-supplied configuration",
                    runs: vec![Run {
                        label: None,
                        config,
                        times,
                    }],
                    observables,
                }
            }
            Err(e) => {
                eprintln!("error: invalid config file: {e}");
                return ExitCode::from(EXIT_INVALID_CONFIG);
            }
        }
    } else {
        let name = args.preset.as_deref().expect("clap enforces preset xor config");
        match find_preset(name) {
            Some(s) => s,
            None => {
                eprintln!(
                    "error: unknown preset '{name}'; available: {}",
                    presets()
                        .iter()
                        .map(|s| s.name)
                        .collect::<Vec<_>>()
                        .join(", ")
                );
                return ExitCode::from(EXIT_UNKNOWN_PRESET);
            }
        }
    };

    if let Err(msg) = ensure_writable(&args.out) {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_UNWRITABLE_DIR);
    }

    // snapshot overrides apply only to snapshot observables; for a
    // config-file run they additionally select which times get
    // phase-distribution output
    let override_times = args.snapshot.as_deref().filter(|ts| !ts.is_empty());
    let snapshot_override = if scenario
        .observables
        .iter()
        .any(|o| matches!(o, Observable::Phase1d | Observable::Phase2d))
    {
        override_times
    } else {
        None
    };

    match run_scenario(&scenario, &args.out, snapshot_override, args.gnuplot) {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            println!("wrote {} file(s) to {}", summary.files.len(), args.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_UNWRITABLE_DIR)
        }
    }
}

fn verify_command(args: VerifyArgs) -> ExitCode {
    match run_suites(args.only.as_deref(), args.tol.scale()) {
        Ok(results) => {
            let mut failures = 0usize;
            for check in &results {
                let tag = if check.passed { "PASS" } else { "FAIL" };
                println!("{tag} {} - {}", check.name, check.detail);
                if !check.passed {
                    failures += 1;
                }
            }
            println!(
                "{} checks, {} failed",
                results.len(),
                failures
            );
            if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VERIFY_FAILED)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::Verify(args) => verify_command(args),
        Command::List => {
            for scenario in presets() {
                println!("{:<6} {}", scenario.name, scenario.description);
            }
            ExitCode::SUCCESS
        }
    }
}
