//! Closed-form population recursions and mean work/heat.
//!
//! These are evaluated from their formulas alone and never call into the
//! propagation code, so they serve as independent references for it.
//! All heats are gained by the system (`Q_sys = int Tr[rho' H]`); the
//! reservoir gains `-Q_sys`.

use serde::{Deserialize, Serialize};

use crate::drive::DriveSpec;
use crate::error::{invalid, Result};
use crate::protocol::ProtocolConfig;
use crate::thermal::free_energy_delta;

/// `P_+(n tau) = (1 - (1 - p_a)^n (1 - 2 P_+(0))) / 2` for the
/// amplitude-modulated drive.
pub fn population_after_n_pulses(p0: f64, p_absorb: f64, n: u32) -> f64 {
    if n == 0 {
        return p0;
    }
    0.5 * (1.0 - (1.0 - p_absorb).powi(n as i32) * (1.0 - 2.0 * p0))
}

/// Per-pulse and total mean work and heat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkHeatSeries {
    /// `<W>_n` for `n = 1..=N`, work done over the `n`-th interpulse interval.
    pub per_pulse_work: Vec<f64>,
    /// `<Q>_n` gained by the system at the `n`-th pulse.
    pub per_pulse_heat: Vec<f64>,
    /// Work done between the last pulse and `tf`.
    pub tail_work: f64,
    pub total_work: f64,
    pub total_heat: f64,
}

impl WorkHeatSeries {
    pub fn reservoir_heat(&self) -> f64 {
        -self.total_heat
    }
}

/// Mean work and heat of the amplitude-modulated protocol.
pub fn amplitude_work_heat(config: &ProtocolConfig) -> Result<WorkHeatSeries> {
    let DriveSpec::AmplitudeModulated(drive) = config.drive else {
        return Err(invalid("amplitude work/heat requires the amplitude-modulated drive"));
    };
    config.validate()?;
    let p0 = config.gibbs_weights()[0];
    let pa = config.channel.p_absorb;
    let imbalance = 1.0 - 2.0 * p0;
    let tau = config.tau;
    let n = config.n_pulses;

    let mut per_pulse_work = Vec::with_capacity(n as usize);
    let mut per_pulse_heat = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let decay = (1.0 - pa).powi(k as i32 - 1) * imbalance;
        let w_prev = drive.omega(f64::from(k - 1) * tau);
        let w_now = drive.omega(f64::from(k) * tau);
        per_pulse_work.push(0.5 * (w_prev - w_now) * decay);
        per_pulse_heat.push(0.5 * w_now * pa * decay);
    }
    let last = f64::from(n) * tau;
    let p_last = population_after_n_pulses(p0, pa, n);
    let tail_work = 0.5 * (2.0 * p_last - 1.0) * (drive.omega(config.tf.max(last)) - drive.omega(last));
    let total_work = per_pulse_work.iter().sum::<f64>() + tail_work;
    let total_heat = per_pulse_heat.iter().sum();
    Ok(WorkHeatSeries { per_pulse_work, per_pulse_heat, tail_work, total_work, total_heat })
}

/// Total mean work up to `config.tf` with its breakdown.
pub fn mean_work_amplitude(config: &ProtocolConfig) -> Result<(f64, WorkHeatSeries)> {
    let s = amplitude_work_heat(config)?;
    Ok((s.total_work, s))
}

/// Total system-gained heat after `config.n_pulses` pulses with its breakdown.
pub fn mean_heat_amplitude(config: &ProtocolConfig) -> Result<(f64, WorkHeatSeries)> {
    let s = amplitude_work_heat(config)?;
    Ok((s.total_heat, s))
}

/// `k = 1 + (1 - p_d) cos^2(alpha)`.
pub fn k_factor(p_pump: f64, alpha: f64) -> f64 {
    let c = alpha.cos();
    1.0 + (1.0 - p_pump) * c * c
}

pub fn is_contractive(p_absorb: f64, p_pump: f64, alpha: f64) -> bool {
    p_absorb * k_factor(p_pump, alpha) < 1.0
}

/// `lim_n P_up(n tau) = (1 - (p_d/k) cos alpha) / 2`.
pub fn floquet_asymptote(p_pump: f64, alpha: f64) -> f64 {
    0.5 * (1.0 - p_pump / k_factor(p_pump, alpha) * alpha.cos())
}

/// Floquet up-population after `n` synchronized pulses:
/// `(1 - p_a k)^n P(0) + (1 - (1 - p_a k)^n) P_inf`.
pub fn floquet_population_recursion(p0: f64, p_absorb: f64, p_pump: f64, alpha: f64, n: u32) -> f64 {
    if !is_contractive(p_absorb, p_pump, alpha) {
        log::warn!(
            "p_a k = {} >= 1: the population recursion does not contract",
            p_absorb * k_factor(p_pump, alpha)
        );
    }
    let decay = (1.0 - p_absorb * k_factor(p_pump, alpha)).powi(n as i32);
    decay * p0 + (1.0 - decay) * floquet_asymptote(p_pump, alpha)
}

/// Pumping probability that puts `floquet_asymptote` at `target`.
pub fn invert_pump_closed_form(target: f64, alpha: f64) -> Result<f64> {
    let c = alpha.cos();
    let y = 1.0 - 2.0 * target;
    let pd = y * (1.0 + c * c) / (c * (1.0 + y * c));
    if !(0.0..=1.0).contains(&pd) || !pd.is_finite() {
        return Err(invalid(format!("no pumping probability in [0, 1] reaches {target}")));
    }
    Ok(pd)
}

/// System-gained mean heat of the phase-rotating protocol at `tf = N tau_theta`:
/// `E_theta (1 - (1 - p_a k)^N)(1 - (p_d/k) cos alpha - 2 P_up(0))`.
pub fn mean_heat_phase(config: &ProtocolConfig) -> Result<f64> {
    let DriveSpec::PhaseRotating(drive) = config.drive else {
        return Err(invalid("phase heat requires the phase-rotating drive"));
    };
    config.validate()?;
    let p0 = config.gibbs_weights()[0];
    let (pa, pd, alpha) = (config.channel.p_absorb, config.channel.p_pump, drive.alpha());
    let k = k_factor(pd, alpha);
    let decay = (1.0 - pa * k).powi(config.n_pulses as i32);
    Ok(drive.e_theta() * (1.0 - decay) * (1.0 - pd / k * alpha.cos() - 2.0 * p0))
}

/// Pulse-free Floquet return probability
/// `P_up|up(t) = 1 - omega0^2/(omega0^2 + theta^2) sin^2(t theta / 2)`.
pub fn rabi_conditional(omega0: f64, theta: f64, t: f64) -> f64 {
    let w2 = omega0 * omega0;
    let s = (0.5 * t * theta).sin();
    1.0 - w2 / (w2 + theta * theta) * s * s
}

/// Irreversible work `<W> - Delta F` of the closed amplitude-modulated
/// evolution before the first pulse at `first_pulse` (if any).
pub fn w_irr(beta: f64, drive: &DriveSpec, tf: f64, first_pulse: Option<f64>) -> Result<f64> {
    let DriveSpec::AmplitudeModulated(am) = drive else {
        return Err(invalid("irreversible work is defined for the amplitude-modulated drive"));
    };
    if let Some(tp) = first_pulse {
        if tf >= tp {
            return Err(invalid(format!("tf = {tf} is not before the first pulse at {tp}")));
        }
    }
    let p0 = crate::thermal::gibbs_population(beta, drive, 0.0);
    let work = 0.5 * (am.omega(tf) - am.omega(0.0)) * (2.0 * p0 - 1.0);
    Ok(work - free_energy_delta(beta, drive, tf)?)
}
