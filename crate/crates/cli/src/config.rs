//! Scenario files: TOML on disk, or the `config` object of a run manifest.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qfr_core::channel::{invert_pump_probability, PulseChannelParams};
use qfr_core::drive::{AmplitudeDrive, DriveSpec, PhaseDrive};
use qfr_core::protocol::{channel_beta_reservoir, one_period_beta_reservoir, GibbsWeighting, ProtocolConfig};
use qfr_core::thermal::{beta_from_upper_population, ThermalContext};

use crate::CliError;

/// Largest accepted Monte-Carlo ensemble per initialization.
pub const MAX_TRAJECTORIES: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Deterministic,
    Montecarlo,
    Both,
}

impl Mode {
    pub fn deterministic(self) -> bool {
        matches!(self, Mode::Deterministic | Mode::Both)
    }

    pub fn montecarlo(self) -> bool {
        matches!(self, Mode::Montecarlo | Mode::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveConfig {
    AmplitudeModulated {
        tau_a: f64,
        /// Defaults to `pi / tau_a`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega0: Option<f64>,
    },
    /// Give `alpha` (magnitude, rad) or `omega0`, not both.
    PhaseRotating {
        tau_theta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega0: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default = "default_p_absorb")]
    pub p_absorb: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_pump: Option<f64>,
    /// Solve `p_pump` so the channel's asymptotic up-population hits this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_p_up_infinity: Option<f64>,
}

fn default_p_absorb() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReservoirMode {
    /// `beta_R = 0`.
    #[default]
    None,
    /// From the exact fixed point of the one-period channel.
    FixedPoint,
    /// From the stationary point of the one-pulse conditional matrix.
    OnePeriod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    /// Final times on a uniform grid; every pulse at or before `tf` is
    /// applied, up to `max_pulses`.
    TfGrid { start: f64, stop: f64, points: usize, max_pulses: u32 },
    /// `tf = n tau + tf_offset` for `n = n_min..=n_max`.
    PulseCount {
        n_min: u32,
        n_max: u32,
        #[serde(default)]
        tf_offset: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub tau: f64,
    /// Exactly one of `beta`, `beta_times_omega0`, `initial_p_up`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_times_omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_p_up: Option<f64>,
    #[serde(default)]
    pub reservoir: ReservoirMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_r: Option<f64>,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    #[serde(default = "default_n")]
    pub n: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub gibbs_weighting: GibbsWeighting,
    /// Also dump per-trajectory records of the last sweep point.
    #[serde(default)]
    pub records: bool,
}

fn default_n() -> u64 {
    100_000
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { n: default_n(), master_seed: 0, gibbs_weighting: GibbsWeighting::default(), records: false }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub mode: Mode,
    pub drive: DriveConfig,
    pub channel: ChannelConfig,
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub montecarlo: MonteCarloConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Quantities fixed before the sweep, reported in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derived {
    pub family: &'static str,
    pub omega0: f64,
    pub beta: f64,
    pub beta_r: f64,
    pub delta_beta: f64,
    pub initial_p_up: f64,
    pub p_absorb: f64,
    pub p_pump: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_theta: Option<f64>,
    /// Upper-level population of the exact channel fixed point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_up_infinity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_pump_inverted: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_pump_closed_form: Option<f64>,
    /// `|p_up_infinity - target|` after inversion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptote_residual: Option<f64>,
}

/// A validated scenario ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub base: ProtocolConfig,
    /// `(n_pulses, tf)` per sweep point.
    pub points: Vec<(u32, f64)>,
    pub derived: Derived,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::InvalidConfig(msg.into())
}

fn core_err(e: qfr_core::Error) -> CliError {
    bad(e.to_string())
}

fn check_finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be finite")))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Read a TOML scenario, or a JSON run manifest whose `config` is re-used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            #[derive(Deserialize)]
            struct Manifest {
                config: ScenarioConfig,
            }
            let m: Manifest = serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
            Ok(m.config)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn drive_spec(&self) -> Result<DriveSpec, CliError> {
        let d = match self.drive {
            DriveConfig::AmplitudeModulated { tau_a, omega0 } => {
                DriveSpec::AmplitudeModulated(AmplitudeDrive::new(omega0.unwrap_or(PI / tau_a), tau_a).map_err(core_err)?)
            }
            DriveConfig::PhaseRotating { tau_theta, alpha, omega0 } => {
                let pd = match (alpha, omega0) {
                    (Some(a), None) => PhaseDrive::from_period_and_angle(tau_theta, a),
                    (None, Some(w)) => {
                        if tau_theta.is_nan() || tau_theta <= 0.0 {
                            return Err(bad("tau_theta must be > 0"));
                        }
                        PhaseDrive::new(w, 2.0 * PI / tau_theta)
                    }
                    _ => return Err(bad("phase_rotating drive needs exactly one of alpha, omega0")),
                };
                DriveSpec::PhaseRotating(pd.map_err(core_err)?)
            }
        };
        Ok(d)
    }

    fn points(&self) -> Result<Vec<(u32, f64)>, CliError> {
        let tau = self.protocol.tau;
        match self.protocol.sweep {
            SweepConfig::TfGrid { start, stop, points, max_pulses } => {
                check_finite("sweep.start", start)?;
                check_finite("sweep.stop", stop)?;
                if points == 0 || start < 0.0 || stop < start || (points == 1 && stop != start) {
                    return Err(bad("tf grid needs points >= 1 and 0 <= start <= stop"));
                }
                Ok((0..points)
                    .map(|i| {
                        let tf = if points == 1 { start } else { start + (stop - start) * i as f64 / (points - 1) as f64 };
                        let fired = (tf / tau * (1.0 + 1e-12)).floor() as u32;
                        (fired.min(max_pulses), tf)
                    })
                    .collect())
            }
            SweepConfig::PulseCount { n_min, n_max, tf_offset } => {
                check_finite("sweep.tf_offset", tf_offset)?;
                if n_max < n_min || tf_offset < 0.0 {
                    return Err(bad("pulse sweep needs n_min <= n_max and tf_offset >= 0"));
                }
                Ok((n_min..=n_max).map(|n| (n, f64::from(n) * tau + tf_offset)).collect())
            }
        }
    }

    /// Validate everything and derive the fixed protocol quantities.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        if self.name.trim().is_empty() {
            return Err(bad("name must not be empty"));
        }
        let drive = self.drive_spec()?;
        let p = &self.protocol;
        if !(p.tau > 0.0 && p.tau.is_finite()) {
            return Err(bad("protocol.tau must be > 0"));
        }
        if self.mode.montecarlo() && !(1..=MAX_TRAJECTORIES).contains(&self.montecarlo.n) {
            return Err(bad(format!("montecarlo.n must lie in 1..={MAX_TRAJECTORIES}")));
        }

        let c = &self.channel;
        let (p_pump, p_pump_inverted) = match (c.p_pump, c.target_p_up_infinity) {
            (Some(pd), None) => (pd, None),
            (None, None) => (0.0, None),
            (None, Some(target)) => {
                let pd = invert_pump_probability(&drive, c.p_absorb, p.tau, target)
                    .map_err(|e| bad(format!("cannot reach target_p_up_infinity = {target}: {e}")))?;
                (pd, Some(pd))
            }
            (Some(_), Some(_)) => return Err(bad("channel takes p_pump or target_p_up_infinity, not both")),
        };
        let channel = PulseChannelParams::new(c.p_absorb, p_pump).map_err(core_err)?;

        let es0 = qfr_core::instantaneous_eigensystem(&drive, 0.0);
        let beta = match (p.beta, p.beta_times_omega0, p.initial_p_up) {
            (Some(b), None, None) => b,
            (None, Some(bw), None) => bw / drive.omega0(),
            (None, None, Some(p0)) => beta_from_upper_population(p0, es0.gap()).map_err(core_err)?,
            _ => return Err(bad("protocol needs exactly one of beta, beta_times_omega0, initial_p_up")),
        };
        let beta_r = match (p.reservoir, p.beta_r) {
            (ReservoirMode::None, None) => 0.0,
            (ReservoirMode::None, Some(b)) => b,
            (ReservoirMode::FixedPoint, None) => channel_beta_reservoir(&drive, &channel, p.tau).map_err(core_err)?,
            (ReservoirMode::OnePeriod, None) => one_period_beta_reservoir(&drive, &channel, p.tau).map_err(core_err)?,
            (_, Some(_)) => return Err(bad("beta_r cannot be combined with a reservoir mode")),
        };
        let thermal = ThermalContext::new(beta, beta_r).map_err(core_err)?;

        let points = self.points()?;
        let base = ProtocolConfig {
            drive,
            channel,
            tau: p.tau,
            n_pulses: 0,
            tf: 0.0,
            thermal,
            gibbs_weighting: self.montecarlo.gibbs_weighting,
        };
        for &(n, tf) in &points {
            base.with_schedule(n, tf).validate().map_err(core_err)?;
        }

        let phase = drive.as_phase();
        let fixed = qfr_core::channel::asymptotic_up_population(&drive, &channel, p.tau).ok();
        let p_up_infinity = if phase.is_some() { fixed } else { None };
        let derived = Derived {
            family: drive.family_name(),
            omega0: drive.omega0(),
            beta,
            beta_r,
            delta_beta: thermal.delta_beta(),
            initial_p_up: base.gibbs_weights()[0],
            p_absorb: channel.p_absorb,
            p_pump,
            theta: phase.map(|d| d.theta),
            alpha: phase.map(|d| d.alpha()),
            e_theta: phase.map(|d| d.e_theta()),
            p_up_infinity,
            k: phase.map(|d| qfr_core::oracle::k_factor(p_pump, d.alpha())),
            p_pump_inverted,
            p_pump_closed_form: match (phase, c.target_p_up_infinity) {
                (Some(d), Some(t)) => qfr_core::oracle::invert_pump_closed_form(t, d.alpha()).ok(),
                _ => None,
            },
            asymptote_residual: match (p_up_infinity, c.target_p_up_infinity) {
                (Some(p), Some(t)) => Some((p - t).abs()),
                _ => None,
            },
        };
        Ok(Resolved { base, points, derived })
    }
}
