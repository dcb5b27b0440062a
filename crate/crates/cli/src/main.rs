use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qfr_cli::config::ScenarioConfig;
use qfr_cli::{check, output_dir, presets, run, CliError};
use qfr_core::channel::invert_pump_probability;
use qfr_core::drive::{DriveSpec, PhaseDrive};

#[derive(Parser)]
#[command(name = "qfr", version, about = "Driven-dissipative qubit fluctuation-relation simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (TOML, or a run manifest JSON) or a preset.
    Run {
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Output directory; defaults to $QFR_OUTPUT_DIR/<name>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario mode (deterministic, montecarlo, both).
        #[arg(long)]
        mode: Option<String>,
        /// Override the ensemble size per initialization.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List presets whose name contains FILTER.
    Presets {
        #[arg(default_value = "")]
        filter: String,
        /// Print the full TOML of each matching preset.
        #[arg(long)]
        toml: bool,
    },
    /// Solve the pumping probability that gives a target asymptotic up-population.
    Invert {
        #[arg(long)]
        tau_theta: f64,
        /// |alpha| in rad.
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 0.25)]
        p_absorb: f64,
    },
    /// Run the invariant suite.
    Check,
}

fn run_command(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run { config, preset, out, mode, n, seed } => {
            let mut cfg = match (config, preset) {
                (Some(path), None) => ScenarioConfig::load(&path)?,
                (None, Some(name)) => {
                    presets::find(&name).ok_or_else(|| CliError::InvalidConfig(format!("unknown preset {name}")))?.config
                }
                _ => return Err(CliError::InvalidConfig("give a config file or --preset".into())),
            };
            if let Some(m) = mode {
                cfg.mode = serde_json::from_value(serde_json::Value::String(m.clone()))
                    .map_err(|_| CliError::InvalidConfig(format!("unknown mode {m}")))?;
            }
            if let Some(n) = n {
                cfg.montecarlo.n = n;
            }
            if let Some(s) = seed {
                cfg.montecarlo.master_seed = s;
            }
            let dir = output_dir(out, &cfg);
            let outcome = run::run_scenario(&cfg, &dir)?;
            println!("{}: wrote {} to {}", cfg.name, outcome.files.join(", "), outcome.dir.display());
            if !outcome.violations.is_empty() {
                for v in &outcome.violations {
                    eprintln!("violation: {v}");
                }
                return Err(CliError::Contract(format!("{} violation(s)", outcome.violations.len())));
            }
            Ok(())
        }
        Command::Presets { filter, toml } => {
            if toml {
                for p in presets::catalog().into_iter().filter(|p| p.name.contains(&filter)) {
                    println!("# {}\n{}", p.summary, p.config.to_toml());
                }
            } else {
                for line in presets::list(&filter) {
                    println!("{line}");
                }
            }
            Ok(())
        }
        Command::Invert { tau_theta, alpha, target, p_absorb } => {
            let drive = DriveSpec::PhaseRotating(
                PhaseDrive::from_period_and_angle(tau_theta, alpha).map_err(|e| CliError::InvalidConfig(e.to_string()))?,
            );
            let pd = invert_pump_probability(&drive, p_absorb, tau_theta, target)
                .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
            println!("p_pump = {pd}");
            match qfr_core::oracle::invert_pump_closed_form(target, alpha) {
                Ok(c) => println!("p_pump (closed form) = {c}"),
                Err(_) => println!("p_pump (closed form) = none in [0, 1]"),
            }
            Ok(())
        }
        Command::Check => {
            let results = check::run_checks()?;
            let failed = results.iter().filter(|r| !r.passed).count();
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            if failed > 0 {
                return Err(CliError::Contract(format!("{failed} check(s) failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
