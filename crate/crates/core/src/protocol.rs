//! Two-point measurement: prepare an eigenstate at `t = 0`, run the
//! driven-dissipative map up to `tf`, measure in the eigenbasis at `tf`.
//! Runs from both eigenstates are weighted with Gibbs populations to build
//! the energy-change distribution and its exponential averages.

use serde::{Deserialize, Serialize};

use crate::channel::{apply_pulse_map, asymptotic_up_population, PulseChannelParams};
use crate::drive::{instantaneous_eigensystem, propagator, DriveSpec, EigenSystem, Level};
use crate::error::{invalid, Error, Result};
use crate::state::{BlochRotation, QubitState};
use crate::thermal::{gibbs_population, log_partition_ratio, ThermalContext};

/// Relative slack on `tf >= n_pulses * tau` for grid-generated final times.
const TF_SLACK: f64 = 1e-9;

/// Atoms whose energy changes differ by less than this (in units of
/// `omega0`) are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GibbsWeighting {
    /// Eigenstate-initialized runs weighted with Gibbs populations afterwards.
    #[default]
    PostWeight,
    /// Initial eigenstate drawn from the Gibbs distribution per trajectory.
    SampleInitial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub drive: DriveSpec,
    pub channel: PulseChannelParams,
    /// Interpulse time, ns. Pulse `n` acts at `n * tau`.
    pub tau: f64,
    pub n_pulses: u32,
    /// Final measurement time, ns.
    pub tf: f64,
    pub thermal: ThermalContext,
    #[serde(default)]
    pub gibbs_weighting: GibbsWeighting,
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        self.drive.validate()?;
        self.channel.validate()?;
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid(format!("tau must be > 0, got {}", self.tau)));
        }
        let last_pulse = f64::from(self.n_pulses) * self.tau;
        if !(self.tf.is_finite() && self.tf >= last_pulse * (1.0 - TF_SLACK)) {
            return Err(invalid(format!(
                "tf = {} precedes the last pulse at {last_pulse}",
                self.tf
            )));
        }
        if !(self.thermal.beta.is_finite() && self.thermal.beta_r.is_finite()) {
            return Err(invalid("inverse temperatures must be finite"));
        }
        Ok(())
    }

    /// Same protocol with a different pulse count and final time.
    pub fn with_schedule(&self, n_pulses: u32, tf: f64) -> Self {
        Self { n_pulses, tf, ..*self }
    }

    /// Eigensystems at preparation and at measurement.
    pub fn eigensystems(&self) -> (EigenSystem, EigenSystem) {
        (instantaneous_eigensystem(&self.drive, 0.0), instantaneous_eigensystem(&self.drive, self.tf))
    }

    /// Gibbs populations `[P_+(0), P_-(0)]`.
    pub fn gibbs_weights(&self) -> [f64; 2] {
        let p = gibbs_population(self.thermal.beta, &self.drive, 0.0);
        [p, 1.0 - p]
    }

    pub fn plan(&self) -> Result<PropagationPlan> {
        self.validate()?;
        let mut pulse_segments = Vec::with_capacity(self.n_pulses as usize);
        for n in 0..self.n_pulses {
            let t0 = f64::from(n) * self.tau;
            pulse_segments.push(propagator(&self.drive, t0, t0 + self.tau)?);
        }
        let last = f64::from(self.n_pulses) * self.tau;
        let tail = propagator(&self.drive, last, self.tf.max(last))?;
        let (initial, last_basis) = self.eigensystems();
        Ok(PropagationPlan { channel: self.channel, pulse_segments, tail, initial, final_basis: last_basis })
    }
}

/// Precomputed propagators for one protocol: evolve over each interpulse
/// interval then pulse, finally evolve up to `tf`.
#[derive(Debug, Clone)]
pub struct PropagationPlan {
    pub channel: PulseChannelParams,
    pub pulse_segments: Vec<BlochRotation>,
    pub tail: BlochRotation,
    pub initial: EigenSystem,
    pub final_basis: EigenSystem,
}

impl PropagationPlan {
    /// Ensemble state at `tf` under the deterministic channel.
    pub fn propagate(&self, state: &QubitState) -> QubitState {
        let s = self
            .pulse_segments
            .iter()
            .fold(*state, |s, u| apply_pulse_map(&u.apply(&s), &self.channel));
        self.tail.apply(&s)
    }

    /// Ensemble states right after each pulse (index 0 is the prepared state).
    pub fn after_each_pulse(&self, state: &QubitState) -> Vec<QubitState> {
        let mut out = Vec::with_capacity(self.pulse_segments.len() + 1);
        out.push(*state);
        let mut s = *state;
        for u in &self.pulse_segments {
            s = apply_pulse_map(&u.apply(&s), &self.channel);
            out.push(s);
        }
        out
    }

    /// Probability of finding the upper level at `tf`.
    pub fn up_probability(&self, final_state: &QubitState) -> f64 {
        final_state.overlap(&self.final_basis.basis_plus).clamp(0.0, 1.0)
    }
}

/// `P_{j|i}(tf)`: rows are final levels, columns initial levels, `+` first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMatrix {
    pub p: [[f64; 2]; 2],
}

impl ConditionalMatrix {
    /// Matrix from the two measured up-probabilities `P_{+|+}` and `P_{+|-}`.
    pub fn from_up_probabilities(up_given_plus: f64, up_given_minus: f64) -> Self {
        Self { p: [[up_given_plus, up_given_minus], [1.0 - up_given_plus, 1.0 - up_given_minus]] }
    }

    pub fn get(&self, final_level: Level, initial: Level) -> f64 {
        self.p[final_level.index()][initial.index()]
    }

    pub fn identity() -> Self {
        Self::from_up_probabilities(1.0, 0.0)
    }

    pub fn max_column_sum_error(&self) -> f64 {
        (0..2).map(|c| (self.p[0][c] + self.p[1][c] - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Up-population of the stationary distribution of this 2x2 chain.
    pub fn stationary_up_population(&self) -> Result<f64> {
        let leave_up = self.p[1][0];
        let enter_up = self.p[0][1];
        let total = leave_up + enter_up;
        if total <= 0.0 {
            return Err(Error::DegenerateChannel("conditional matrix has no unique stationary state".into()));
        }
        Ok(enter_up / total)
    }
}

pub fn conditional_matrix(config: &ProtocolConfig) -> Result<ConditionalMatrix> {
    let plan = config.plan()?;
    let up = |level| plan.up_probability(&plan.propagate(&plan.initial.basis(level)));
    Ok(ConditionalMatrix::from_up_probabilities(up(Level::Plus), up(Level::Minus)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyAtom {
    pub delta_e: f64,
    pub prob: f64,
}

/// Atoms of `p(Delta E)`, sorted by energy change, coincident values merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyChangeDistribution {
    pub atoms: Vec<EnergyAtom>,
}

impl EnergyChangeDistribution {
    pub fn total_probability(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob).sum()
    }
}

/// Build `p(Delta E)` from a conditional matrix and explicit initial weights
/// `[P_+(0), P_-(0)]`.
pub fn energy_change_distribution_weighted(
    cm: &ConditionalMatrix,
    config: &ProtocolConfig,
    weights: [f64; 2],
) -> EnergyChangeDistribution {
    let (e0, ef) = config.eigensystems();
    let mut raw = Vec::with_capacity(4);
    for i in Level::BOTH {
        for j in Level::BOTH {
            let prob = cm.get(j, i) * weights[i.index()];
            raw.push(EnergyAtom { delta_e: ef.energy(j) - e0.energy(i), prob });
        }
    }
    raw.sort_by(|a, b| a.delta_e.total_cmp(&b.delta_e));
    let tol = MERGE_TOLERANCE * config.drive.omega0();
    let mut atoms: Vec<EnergyAtom> = Vec::with_capacity(4);
    for a in raw {
        match atoms.last_mut() {
            Some(last) if (a.delta_e - last.delta_e).abs() <= tol => last.prob += a.prob,
            _ => atoms.push(a),
        }
    }
    atoms.retain(|a| a.prob != 0.0);
    EnergyChangeDistribution { atoms }
}

/// `p(Delta E)` with Gibbs initial weights.
pub fn energy_change_distribution(cm: &ConditionalMatrix, config: &ProtocolConfig) -> EnergyChangeDistribution {
    energy_change_distribution_weighted(cm, config, config.gibbs_weights())
}

/// `<exp(-gamma Delta E)>`.
pub fn fr_functional(dist: &EnergyChangeDistribution, gamma: f64) -> f64 {
    dist.atoms.iter().map(|a| a.prob * (-gamma * a.delta_e).exp()).sum()
}

pub fn mean_energy_change(dist: &EnergyChangeDistribution) -> f64 {
    dist.atoms.iter().map(|a| a.prob * a.delta_e).sum()
}

/// Reservoir inverse pseudo-temperature from the asymptotic up-population
/// across the full gap: `-ln(p/(1-p)) / gap`.
pub fn beta_reservoir(p_up_infinity: f64, gap: f64) -> Result<f64> {
    if !(p_up_infinity > 0.0 && p_up_infinity < 1.0) {
        return Err(Error::OutOfRange(format!(
            "asymptotic population {p_up_infinity} gives an unbounded inverse temperature"
        )));
    }
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(invalid(format!("gap must be > 0, got {gap}")));
    }
    Ok(-(p_up_infinity / (1.0 - p_up_infinity)).ln() / gap)
}

/// `beta_R` from the full channel fixed point of the periodic sequence.
pub fn channel_beta_reservoir(drive: &DriveSpec, channel: &PulseChannelParams, tau: f64) -> Result<f64> {
    let p = asymptotic_up_population(drive, channel, tau)?;
    beta_reservoir(p, instantaneous_eigensystem(drive, tau).gap())
}

/// `beta_R` from the stationary point of the one-period conditional matrix,
/// the value for which the exchange relation holds exactly after one pulse.
pub fn one_period_beta_reservoir(drive: &DriveSpec, channel: &PulseChannelParams, tau: f64) -> Result<f64> {
    let cfg = ProtocolConfig {
        drive: *drive,
        channel: *channel,
        tau,
        n_pulses: 1,
        tf: tau,
        thermal: ThermalContext { beta: 0.0, beta_r: 0.0 },
        gibbs_weighting: GibbsWeighting::PostWeight,
    };
    let p = conditional_matrix(&cfg)?.stationary_up_population()?;
    beta_reservoir(p, instantaneous_eigensystem(drive, tau).gap())
}

/// `<Delta E> - (<W> + <Q>)` with `<Q>` the heat gained by the system.
pub fn first_law_check(dist: &EnergyChangeDistribution, mean_w: f64, mean_q: f64) -> f64 {
    mean_energy_change(dist) - (mean_w + mean_q)
}

/// Mean energy bookkeeping from deterministic propagation of the Gibbs
/// ensemble. Energies are taken in the instantaneous eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatedEnergetics {
    /// Upper-level population right after each pulse; index 0 is `t = 0`.
    pub up_populations: Vec<f64>,
    pub per_pulse_work: Vec<f64>,
    /// System-gained heat at each pulse.
    pub per_pulse_heat: Vec<f64>,
    pub tail_work: f64,
    pub total_work: f64,
    pub total_heat: f64,
    /// `<E>(tf) - <E>(0)`.
    pub energy_change: f64,
}

fn mean_energy(drive: &DriveSpec, t: f64, state: &QubitState) -> f64 {
    let es = instantaneous_eigensystem(drive, t);
    let p = state.overlap(&es.basis_plus);
    es.e_plus * p + es.e_minus * (1.0 - p)
}

pub fn propagated_energetics(config: &ProtocolConfig) -> Result<PropagatedEnergetics> {
    let plan = config.plan()?;
    let [p_plus, _] = config.gibbs_weights();
    let start = plan.initial.basis(Level::Plus).mix(&plan.initial.basis(Level::Minus), p_plus);
    let drive = &config.drive;
    let n = plan.pulse_segments.len();
    let mut up_populations = Vec::with_capacity(n + 1);
    let mut per_pulse_work = Vec::with_capacity(n);
    let mut per_pulse_heat = Vec::with_capacity(n);
    up_populations.push(p_plus);
    let e_start = mean_energy(drive, 0.0, &start);
    let mut s = start;
    let mut e = e_start;
    for (k, u) in plan.pulse_segments.iter().enumerate() {
        let t = (k + 1) as f64 * config.tau;
        let before = u.apply(&s);
        let e_before = mean_energy(drive, t, &before);
        s = apply_pulse_map(&before, &plan.channel);
        let e_after = mean_energy(drive, t, &s);
        per_pulse_work.push(e_before - e);
        per_pulse_heat.push(e_after - e_before);
        up_populations.push(s.overlap(&instantaneous_eigensystem(drive, t).basis_plus));
        e = e_after;
    }
    let e_final = mean_energy(drive, config.tf, &plan.tail.apply(&s));
    let tail_work = e_final - e;
    let total_work = per_pulse_work.iter().sum::<f64>() + tail_work;
    let total_heat = per_pulse_heat.iter().sum();
    Ok(PropagatedEnergetics {
        up_populations,
        per_pulse_work,
        per_pulse_heat,
        tail_work,
        total_work,
        total_heat,
        energy_change: e_final - e_start,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrReport {
    pub mean_delta_e: f64,
    /// `<exp(-gamma Delta E)>`
    pub fr_value: f64,
    /// `exp(-beta Delta F) = Z(tf)/Z(0)`
    pub fr_target: f64,
    pub gamma: f64,
    pub stderr: Option<f64>,
}

/// Right-hand side of the fluctuation relation, `Z(tf)/Z(0)`.
pub fn fr_target(config: &ProtocolConfig) -> f64 {
    log_partition_ratio(config.thermal.beta, &config.drive, config.tf).exp()
}

/// Deterministic fluctuation-relation report with `gamma = beta - beta_R`.
pub fn fr_report(config: &ProtocolConfig) -> Result<FrReport> {
    let cm = conditional_matrix(config)?;
    let dist = energy_change_distribution(&cm, config);
    let gamma = config.thermal.delta_beta();
    Ok(FrReport {
        mean_delta_e: mean_energy_change(&dist),
        fr_value: fr_functional(&dist, gamma),
        fr_target: fr_target(config),
        gamma,
        stderr: None,
    })
}
