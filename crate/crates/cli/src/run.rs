//! Sweep execution and result files.
//!
//! Every CSV row carries `tf`, `n_pulses` and `mode`. Energies are in units
//! of `omega0`, inverse temperatures times `omega0`, times in ns. Heats are
//! gained by the system.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qfr_core::drive::{DriveSpec, Level};
use qfr_core::montecarlo::{fr_estimate_mc, run_ensemble, run_trajectories_with_records, write_records, EnsembleStats};
use qfr_core::oracle::{amplitude_work_heat, mean_heat_phase};
use qfr_core::protocol::{
    conditional_matrix, energy_change_distribution, fr_functional, fr_target, mean_energy_change, propagated_energetics,
    ConditionalMatrix, ProtocolConfig,
};
use qfr_core::thermal::free_energy_delta;

use crate::config::{Derived, Resolved, ScenarioConfig};
use crate::CliError;

pub const FR_TOLERANCE: f64 = 1e-9;
pub const FIRST_LAW_TOLERANCE: f64 = 1e-9;
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;
pub const ASYMPTOTE_TOLERANCE: f64 = 1e-3;

const DET: &str = "deterministic";
const MC: &str = "montecarlo";

#[derive(Debug, Serialize)]
pub struct ConditionalRow {
    pub tf: f64,
    pub n_pulses: u32,
    pub mode: &'static str,
    pub p_up_given_up: f64,
    pub p_down_given_up: f64,
    pub p_up_given_down: f64,
    pub p_down_given_down: f64,
    pub stderr_given_up: Option<f64>,
    pub stderr_given_down: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct EnergeticsRow {
    pub tf: f64,
    pub n_pulses: u32,
    pub mode: &'static str,
    pub delta_e: f64,
    pub work: Option<f64>,
    pub heat: Option<f64>,
    pub work_closed_form: Option<f64>,
    pub heat_closed_form: Option<f64>,
    pub delta_f: Option<f64>,
    pub first_law_residual: Option<f64>,
    pub delta_beta_delta_e: f64,
    pub delta_beta_heat: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct FrRow {
    pub tf: f64,
    pub n_pulses: u32,
    pub mode: &'static str,
    pub gamma_times_omega0: f64,
    pub fr_value: f64,
    pub fr_target: f64,
    pub deviation: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct BlochRow {
    pub tf: f64,
    pub n_pulses: u32,
    pub mode: &'static str,
    pub initial: &'static str,
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
    pub p_up: f64,
}

#[derive(Debug, Default)]
pub struct Tables {
    pub conditional: Vec<ConditionalRow>,
    pub energetics: Vec<EnergeticsRow>,
    pub fr: Vec<FrRow>,
    pub bloch: Vec<BlochRow>,
    pub violations: Vec<String>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub violations: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ScenarioConfig,
    derived: &'a Derived,
    points: usize,
    outputs: &'a [String],
    violations: &'a [String],
}

/// Seed of sweep point `index`, so points use disjoint stream families.
pub fn point_seed(master_seed: u64, index: usize) -> u64 {
    master_seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn conditional_row(tf: f64, n: u32, mode: &'static str, cm: &ConditionalMatrix, se: Option<[f64; 2]>) -> ConditionalRow {
    ConditionalRow {
        tf,
        n_pulses: n,
        mode,
        p_up_given_up: cm.get(Level::Plus, Level::Plus),
        p_down_given_up: cm.get(Level::Minus, Level::Plus),
        p_up_given_down: cm.get(Level::Plus, Level::Minus),
        p_down_given_down: cm.get(Level::Minus, Level::Minus),
        stderr_given_up: se.map(|s| s[0]),
        stderr_given_down: se.map(|s| s[1]),
    }
}

/// Closed-form `(<W>, <Q>)` where one exists for this drive and schedule.
fn closed_forms(cfg: &ProtocolConfig) -> Result<Option<(f64, f64)>, CliError> {
    match cfg.drive {
        DriveSpec::AmplitudeModulated(_) => {
            let s = amplitude_work_heat(cfg)?;
            Ok(Some((s.total_work, s.total_heat)))
        }
        DriveSpec::PhaseRotating(_) => {
            let strobe = f64::from(cfg.n_pulses) * cfg.tau;
            if (cfg.tf - strobe).abs() <= 1e-9 * cfg.tau {
                Ok(Some((0.0, mean_heat_phase(cfg)?)))
            } else {
                Ok(None)
            }
        }
    }
}

fn deterministic_point(cfg: &ProtocolConfig, t: &mut Tables) -> Result<(), CliError> {
    let (n, tf) = (cfg.n_pulses, cfg.tf);
    let w0 = cfg.drive.omega0();
    let amplitude = cfg.drive.as_amplitude().is_some();
    let cm = conditional_matrix(cfg)?;
    if cm.max_column_sum_error() > STOCHASTIC_TOLERANCE {
        t.violations.push(format!("tf = {tf}: conditional columns off by {:e}", cm.max_column_sum_error()));
    }
    t.conditional.push(conditional_row(tf, n, DET, &cm, None));

    let dist = energy_change_distribution(&cm, cfg);
    let delta_e = mean_energy_change(&dist);
    let prop = propagated_energetics(cfg)?;
    let closed = closed_forms(cfg)?;
    let (w, q) = closed.unwrap_or((prop.total_work, prop.total_heat));
    let residual = delta_e - (w + q);
    if amplitude {
        if residual.abs() > FIRST_LAW_TOLERANCE * w0 {
            t.violations.push(format!("tf = {tf}: first-law residual {:e} omega0", residual / w0));
        }
        let gap = (w - prop.total_work).abs().max((q - prop.total_heat).abs());
        if gap > FIRST_LAW_TOLERANCE * w0 {
            t.violations.push(format!("tf = {tf}: closed forms differ from propagation by {:e} omega0", gap / w0));
        }
    }
    let db = cfg.thermal.delta_beta();
    t.energetics.push(EnergeticsRow {
        tf,
        n_pulses: n,
        mode: DET,
        delta_e: delta_e / w0,
        work: Some(prop.total_work / w0),
        heat: Some(prop.total_heat / w0),
        work_closed_form: closed.map(|c| c.0 / w0),
        heat_closed_form: closed.map(|c| c.1 / w0),
        delta_f: free_energy_delta(cfg.thermal.beta, &cfg.drive, tf).ok().map(|f| f / w0),
        first_law_residual: Some(residual / w0),
        delta_beta_delta_e: db * delta_e,
        delta_beta_heat: Some(db * q),
    });

    let value = fr_functional(&dist, db);
    let target = fr_target(cfg);
    if amplitude && (value - target).abs() > FR_TOLERANCE {
        t.violations.push(format!("tf = {tf}: <exp(-beta dE)> = {value} but Z(tf)/Z(0) = {target}"));
    }
    t.fr.push(FrRow {
        tf,
        n_pulses: n,
        mode: DET,
        gamma_times_omega0: db * w0,
        fr_value: value,
        fr_target: target,
        deviation: value - target,
        stderr: None,
    });
    Ok(())
}

fn montecarlo_point(cfg: &ProtocolConfig, stats: &EnsembleStats, t: &mut Tables) -> Result<(), CliError> {
    let (n, tf) = (cfg.n_pulses, cfg.tf);
    let w0 = cfg.drive.omega0();
    let cm = stats.conditional_estimate()?;
    let se = stats.std_err()?;
    t.conditional.push(conditional_row(tf, n, MC, &cm, Some(se[0])));
    let db = cfg.thermal.delta_beta();
    let r = fr_estimate_mc(stats, cfg, db)?;
    t.energetics.push(EnergeticsRow {
        tf,
        n_pulses: n,
        mode: MC,
        delta_e: r.mean_delta_e / w0,
        work: None,
        heat: None,
        work_closed_form: None,
        heat_closed_form: None,
        delta_f: None,
        first_law_residual: None,
        delta_beta_delta_e: db * r.mean_delta_e,
        delta_beta_heat: None,
    });
    t.fr.push(FrRow {
        tf,
        n_pulses: n,
        mode: MC,
        gamma_times_omega0: db * w0,
        fr_value: r.fr_value,
        fr_target: r.fr_target,
        deviation: r.fr_value - r.fr_target,
        stderr: r.stderr,
    });
    Ok(())
}

fn bloch_rows(resolved: &Resolved, t: &mut Tables) -> Result<(), CliError> {
    let max_n = resolved.points.iter().map(|p| p.0).max().unwrap_or(0);
    let cfg = resolved.base.with_schedule(max_n, f64::from(max_n) * resolved.base.tau);
    let plan = cfg.plan()?;
    for level in Level::BOTH {
        for (k, s) in plan.after_each_pulse(&plan.initial.basis(level)).iter().enumerate() {
            let tk = k as f64 * cfg.tau;
            let es = qfr_core::instantaneous_eigensystem(&cfg.drive, tk);
            let [rx, ry, rz] = s.bloch();
            t.bloch.push(BlochRow {
                tf: tk,
                n_pulses: k as u32,
                mode: DET,
                initial: level.symbol(),
                rx,
                ry,
                rz,
                p_up: s.overlap(&es.basis_plus),
            });
        }
    }
    Ok(())
}

/// Compute all tables for a resolved scenario.
pub fn compute(cfg: &ScenarioConfig, resolved: &Resolved) -> Result<Tables, CliError> {
    let mut t = Tables::default();
    if let (Some(r), Some(_)) = (resolved.derived.asymptote_residual, cfg.channel.target_p_up_infinity) {
        if r > ASYMPTOTE_TOLERANCE {
            t.violations.push(format!("inverted channel misses its asymptote target by {r:e}"));
        }
    }
    for (i, &(n, tf)) in resolved.points.iter().enumerate() {
        let pc = resolved.base.with_schedule(n, tf);
        if cfg.mode.deterministic() {
            deterministic_point(&pc, &mut t)?;
        }
        if cfg.mode.montecarlo() {
            let stats = run_ensemble(&pc, cfg.montecarlo.n, point_seed(cfg.montecarlo.master_seed, i))?;
            montecarlo_point(&pc, &stats, &mut t)?;
        }
    }
    if cfg.mode.deterministic() {
        bloch_rows(resolved, &mut t)?;
    }
    Ok(t)
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T], files: &mut Vec<String>) -> Result<(), CliError> {
    if rows.is_empty() {
        return Ok(());
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(dir.join(name))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    files.push(name.to_string());
    Ok(())
}

/// Run a scenario and write its files into `dir`. Contract violations are
/// reported in the outcome (and the manifest), not as an error.
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path) -> Result<RunOutcome, CliError> {
    let resolved = cfg.resolve()?;
    let tables = compute(cfg, &resolved)?;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    write_csv(dir, "conditional.csv", &tables.conditional, &mut files)?;
    write_csv(dir, "energetics.csv", &tables.energetics, &mut files)?;
    write_csv(dir, "fr.csv", &tables.fr, &mut files)?;
    write_csv(dir, "bloch.csv", &tables.bloch, &mut files)?;

    if cfg.mode.montecarlo() && cfg.montecarlo.records {
        let i = resolved.points.len() - 1;
        let (n, tf) = resolved.points[i];
        let pc = resolved.base.with_schedule(n, tf);
        let seed = point_seed(cfg.montecarlo.master_seed, i);
        let mut records = Vec::new();
        for level in Level::BOTH {
            records.extend(run_trajectories_with_records(&pc, level, cfg.montecarlo.n, seed)?.1);
        }
        let mut out = BufWriter::new(File::create(dir.join("records.csv"))?);
        write_records(&mut out, &records)?;
        files.push("records.csv".into());
    }

    files.push("manifest.json".into());
    let manifest = Manifest {
        tool: "qfr",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        derived: &resolved.derived,
        points: resolved.points.len(),
        outputs: &files,
        violations: &tables.violations,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(RunOutcome { dir: dir.to_path_buf(), files, violations: tables.violations })
}
