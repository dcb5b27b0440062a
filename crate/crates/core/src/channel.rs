//! Laser-pulse dissipation: with probability `p_absorb` the pulse is
//! absorbed, which projects onto the sigma_z basis and then optically pumps
//! `|1>` into `|0>` with probability `p_pump`. The pulse itself is treated
//! as instantaneous; the drive only acts between pulses.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::drive::{instantaneous_eigensystem, propagator, DriveSpec};
use crate::error::{invalid, Error, Result};
use crate::state::QubitState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseChannelParams {
    /// Absorption probability `p_a`.
    pub p_absorb: f64,
    /// Pumping probability `p_d = 1 - exp(-Gamma delta)`.
    pub p_pump: f64,
}

impl PulseChannelParams {
    pub fn new(p_absorb: f64, p_pump: f64) -> Result<Self> {
        let p = Self { p_absorb, p_pump };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_absorb", self.p_absorb), ("p_pump", self.p_pump)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionOutcome {
    Zero,
    One,
}

/// What happened during one sampled pulse. `outcome` and `pumped` are set
/// exactly when the pulse was absorbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulseEvent {
    pub absorbed: bool,
    pub outcome: Option<ProjectionOutcome>,
    pub pumped: Option<bool>,
}

impl PulseEvent {
    const MISSED: PulseEvent = PulseEvent { absorbed: false, outcome: None, pumped: None };
}

/// Ensemble action of one pulse:
/// `(1 - p_a) rho + p_a Pump(Dephase_z(rho))`.
pub fn apply_pulse_map(state: &QubitState, params: &PulseChannelParams) -> QubitState {
    let pa = params.p_absorb;
    let absorbed_z = state.rz + params.p_pump * (1.0 - state.rz);
    QubitState {
        rx: (1.0 - pa) * state.rx,
        ry: (1.0 - pa) * state.ry,
        rz: (1.0 - pa) * state.rz + pa * absorbed_z,
    }
}

/// One stochastic realization of a pulse. Consumes one uniform draw when
/// the pulse is missed, two or three when it is absorbed.
pub fn sample_pulse<R: Rng + ?Sized>(
    state: &QubitState,
    params: &PulseChannelParams,
    rng: &mut R,
) -> (QubitState, PulseEvent) {
    if rng.random::<f64>() >= params.p_absorb {
        return (*state, PulseEvent::MISSED);
    }
    let p_zero = 0.5 * (1.0 + state.rz);
    if rng.random::<f64>() < p_zero {
        let ev = PulseEvent { absorbed: true, outcome: Some(ProjectionOutcome::Zero), pumped: Some(false) };
        return (QubitState::ket_zero(), ev);
    }
    let pumped = rng.random::<f64>() < params.p_pump;
    let out = if pumped { QubitState::ket_zero() } else { QubitState::ket_one() };
    let ev = PulseEvent { absorbed: true, outcome: Some(ProjectionOutcome::One), pumped: Some(pumped) };
    (out, ev)
}

/// Affine Bloch map `r -> linear r + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineBlochMap {
    pub linear: Matrix3<f64>,
    pub offset: Vector3<f64>,
}

impl AffineBlochMap {
    /// Free evolution over `(0, tau)` followed by one pulse.
    pub fn one_period(drive: &DriveSpec, params: &PulseChannelParams, tau: f64) -> Result<Self> {
        params.validate()?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid(format!("tau must be > 0, got {tau}")));
        }
        let rot = propagator(drive, 0.0, tau)?.matrix();
        let pa = params.p_absorb;
        let pd = params.p_pump;
        let shrink = Matrix3::from_diagonal(&Vector3::new(1.0 - pa, 1.0 - pa, 1.0 - pa * pd));
        Ok(Self { linear: shrink * rot, offset: Vector3::new(0.0, 0.0, pa * pd) })
    }

    pub fn apply(&self, state: &QubitState) -> QubitState {
        QubitState::from_vector(self.linear * state.vector() + self.offset)
    }

    /// Unique fixed point, if `I - linear` is well conditioned.
    pub fn fixed_point(&self) -> Result<QubitState> {
        let system = Matrix3::identity() - self.linear;
        let smallest = system.singular_values().min();
        if smallest < 1e-10 {
            return Err(Error::DegenerateChannel(format!(
                "one-period map has a non-isolated fixed point (smallest singular value {smallest:.3e})"
            )));
        }
        let r = system
            .lu()
            .solve(&self.offset)
            .ok_or_else(|| Error::DegenerateChannel("singular one-period map".into()))?;
        Ok(QubitState::from_vector(r))
    }
}

/// State right after a pulse that the periodic sequence (evolve over `tau`,
/// then pulse) converges to.
pub fn channel_fixed_point(drive: &DriveSpec, params: &PulseChannelParams, tau: f64) -> Result<QubitState> {
    if params.p_absorb == 0.0 {
        return Err(Error::DegenerateChannel("p_absorb = 0 leaves every state of the drive orbit invariant".into()));
    }
    AffineBlochMap::one_period(drive, params, tau)?.fixed_point()
}

/// Upper-level population of the channel fixed point, measured in the
/// eigenbasis at `tau`.
pub fn asymptotic_up_population(drive: &DriveSpec, params: &PulseChannelParams, tau: f64) -> Result<f64> {
    let fp = channel_fixed_point(drive, params, tau)?;
    Ok(fp.overlap(&instantaneous_eigensystem(drive, tau).basis_plus))
}

/// Solve for the pumping probability that puts the asymptotic up-population
/// at `target`, holding `p_absorb` fixed. Bisection on `[0, 1]`; the
/// asymptote falls monotonically with pumping strength.
pub fn invert_pump_probability(drive: &DriveSpec, p_absorb: f64, tau: f64, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::OutOfRange(format!("target population {target} not in (0, 1)")));
    }
    let f = |pd: f64| -> Result<f64> {
        asymptotic_up_population(drive, &PulseChannelParams::new(p_absorb, pd)?, tau)
    };
    let (f_lo, f_hi) = (f(0.0)?, f(1.0)?);
    if !((f_hi..=f_lo).contains(&target)) {
        return Err(Error::OutOfRange(format!(
            "target {target} outside reachable asymptotes [{f_hi:.6}, {f_lo:.6}] for p_absorb = {p_absorb}"
        )));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
