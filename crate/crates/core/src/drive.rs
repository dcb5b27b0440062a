//! The two drive families, their eigensystems and exact propagators.
//!
//! Units: hbar = 1, time in ns, angular frequency (and energy) in rad/ns.
//!
//! * Amplitude-modulated: `H(t) = omega(t)/2 sx` with
//!   `omega(t) = omega0/2 (1 + cos^2(pi t / tau_a))`.
//! * Phase-rotating: `H(t) = omega0/2 (sx cos(theta t) + sy sin(theta t))`.
//!   In the frame co-rotating with the drive the generator is the
//!   time-independent `H_F = (omega0 sx - theta sz)/2`, so
//!   `U(t1, t0) = Rz(theta t1) exp(-i H_F (t1 - t0)) Rz(-theta t0)` and over
//!   one period `tau_theta = 2 pi / theta` the frame factors cancel.
//!   Energies are the Floquet quasi-energies `+-E_theta`,
//!   `E_theta = sqrt(omega0^2 + theta^2)/2`, with eigenbasis fixed in time.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::state::{BlochRotation, QubitState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeDrive {
    /// rad/ns
    pub omega0: f64,
    /// Modulation period, ns.
    pub tau_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDrive {
    /// rad/ns
    pub omega0: f64,
    /// Phase rotation rate, rad/ns.
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveSpec {
    AmplitudeModulated(AmplitudeDrive),
    PhaseRotating(PhaseDrive),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl AmplitudeDrive {
    pub fn new(omega0: f64, tau_a: f64) -> Result<Self> {
        let d = Self { omega0, tau_a };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega0", self.omega0)?;
        positive("tau_a", self.tau_a)
    }

    /// Instantaneous Rabi frequency `omega(t)`.
    pub fn omega(&self, t: f64) -> f64 {
        let c = (PI * t / self.tau_a).cos();
        0.5 * self.omega0 * (1.0 + c * c)
    }

    /// Antiderivative of `omega` with `F(0) = 0`.
    fn omega_antiderivative(&self, t: f64) -> f64 {
        let ta = self.tau_a;
        0.5 * self.omega0 * (1.5 * t + ta / (4.0 * PI) * (2.0 * PI * t / ta).sin())
    }

    /// `int_{t0}^{t1} omega(t) dt`, in closed form.
    pub fn phase_integral(&self, t0: f64, t1: f64) -> Result<f64> {
        if !(t0 >= 0.0 && t1 >= t0) {
            return Err(invalid(format!("need 0 <= t0 <= t1, got ({t0}, {t1})")));
        }
        Ok(self.omega_antiderivative(t1) - self.omega_antiderivative(t0))
    }
}

impl PhaseDrive {
    pub fn new(omega0: f64, theta: f64) -> Result<Self> {
        let d = Self { omega0, theta };
        d.validate()?;
        Ok(d)
    }

    /// Drive with period `tau_theta` whose Floquet angle has magnitude
    /// `abs_alpha`, i.e. `omega0 = theta tan|alpha|`.
    pub fn from_period_and_angle(tau_theta: f64, abs_alpha: f64) -> Result<Self> {
        positive("tau_theta", tau_theta)?;
        if !(abs_alpha > 0.0 && abs_alpha < PI / 2.0) {
            return Err(invalid(format!("|alpha| must lie in (0, pi/2), got {abs_alpha}")));
        }
        let theta = 2.0 * PI / tau_theta;
        Self::new(theta * abs_alpha.tan(), theta)
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega0", self.omega0)?;
        positive("theta", self.theta)
    }

    pub fn tau_theta(&self) -> f64 {
        2.0 * PI / self.theta
    }

    /// Signed Floquet angle `alpha = -atan(omega0 / theta)`.
    pub fn alpha(&self) -> f64 {
        -(self.omega0 / self.theta).atan()
    }

    pub fn e_theta(&self) -> f64 {
        0.5 * self.omega0.hypot(self.theta)
    }

    /// Field vector `h` of the rotating-frame generator `H_F = (h . sigma)/2`.
    pub fn floquet_generator(&self) -> [f64; 3] {
        [self.omega0, 0.0, -self.theta]
    }

    /// Bloch vector of the upper Floquet state,
    /// `cos(alpha/2)|1> - sin(alpha/2)|0>`.
    pub fn up_axis(&self) -> [f64; 3] {
        let a = self.alpha();
        [-a.sin(), 0.0, -a.cos()]
    }
}

/// Instantaneous (or Floquet) energies and eigenprojectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub e_plus: f64,
    pub e_minus: f64,
    pub basis_plus: QubitState,
    pub basis_minus: QubitState,
}

impl EigenSystem {
    fn symmetric(e: f64, axis: [f64; 3]) -> Self {
        let [x, y, z] = axis;
        Self {
            e_plus: e,
            e_minus: -e,
            basis_plus: QubitState { rx: x, ry: y, rz: z },
            basis_minus: QubitState { rx: -x, ry: -y, rz: -z },
        }
    }

    pub fn energy(&self, level: Level) -> f64 {
        match level {
            Level::Plus => self.e_plus,
            Level::Minus => self.e_minus,
        }
    }

    pub fn basis(&self, level: Level) -> QubitState {
        match level {
            Level::Plus => self.basis_plus,
            Level::Minus => self.basis_minus,
        }
    }

    pub fn gap(&self) -> f64 {
        self.e_plus - self.e_minus
    }
}

/// Upper (`+`, "up") or lower (`-`, "down") eigenlevel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Plus,
    Minus,
}

impl Level {
    pub const BOTH: [Level; 2] = [Level::Plus, Level::Minus];

    pub fn index(self) -> usize {
        match self {
            Level::Plus => 0,
            Level::Minus => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Level::Plus => "+",
            Level::Minus => "-",
        }
    }
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DriveSpec::AmplitudeModulated(d) => d.validate(),
            DriveSpec::PhaseRotating(d) => d.validate(),
        }
    }

    pub fn omega0(&self) -> f64 {
        match self {
            DriveSpec::AmplitudeModulated(d) => d.omega0,
            DriveSpec::PhaseRotating(d) => d.omega0,
        }
    }

    pub fn as_amplitude(&self) -> Option<&AmplitudeDrive> {
        match self {
            DriveSpec::AmplitudeModulated(d) => Some(d),
            DriveSpec::PhaseRotating(_) => None,
        }
    }

    pub fn as_phase(&self) -> Option<&PhaseDrive> {
        match self {
            DriveSpec::PhaseRotating(d) => Some(d),
            DriveSpec::AmplitudeModulated(_) => None,
        }
    }

    /// Half the spectral gap at time `t`: `omega(t)/2` or `E_theta`.
    pub fn upper_energy(&self, t: f64) -> f64 {
        match self {
            DriveSpec::AmplitudeModulated(d) => 0.5 * d.omega(t),
            DriveSpec::PhaseRotating(d) => d.e_theta(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            DriveSpec::AmplitudeModulated(_) => "amplitude_modulated",
            DriveSpec::PhaseRotating(_) => "phase_rotating",
        }
    }
}

pub fn instantaneous_eigensystem(drive: &DriveSpec, t: f64) -> EigenSystem {
    match drive {
        DriveSpec::AmplitudeModulated(d) => EigenSystem::symmetric(0.5 * d.omega(t), [1.0, 0.0, 0.0]),
        DriveSpec::PhaseRotating(d) => EigenSystem::symmetric(d.e_theta(), d.up_axis()),
    }
}

/// `int_{t0}^{t1} omega(t) dt` for the amplitude-modulated drive.
pub fn phase_integral(drive: &AmplitudeDrive, t0: f64, t1: f64) -> Result<f64> {
    drive.phase_integral(t0, t1)
}

/// Bloch-ball image of the exact propagator `U(t1, t0)`.
pub fn propagator(drive: &DriveSpec, t0: f64, t1: f64) -> Result<BlochRotation> {
    if !(t0.is_finite() && t1.is_finite() && t0 >= 0.0) {
        return Err(invalid(format!("times must be finite with t0 >= 0, got ({t0}, {t1})")));
    }
    if t1 < t0 {
        return Err(invalid(format!("cannot propagate backwards from {t0} to {t1}")));
    }
    Ok(match drive {
        DriveSpec::AmplitudeModulated(d) => BlochRotation::about_x(d.phase_integral(t0, t1)?),
        DriveSpec::PhaseRotating(d) => {
            let dt = t1 - t0;
            let [hx, hy, hz] = d.floquet_generator();
            let body = BlochRotation::from_generator([hx * dt, hy * dt, hz * dt]);
            let enter = BlochRotation::about_z(-d.theta * t0);
            let leave = BlochRotation::about_z(d.theta * t1);
            leave.then_after(&body.then_after(&enter))
        }
    })
}

pub fn evolve_unitary(state: &QubitState, drive: &DriveSpec, t0: f64, t1: f64) -> Result<QubitState> {
    Ok(propagator(drive, t0, t1)?.apply(state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn am() -> AmplitudeDrive {
        AmplitudeDrive::new(PI / 616.0, 616.0).unwrap()
    }

    #[test]
    fn amplitude_eigensystem_at_start_and_half_period() {
        let d = DriveSpec::AmplitudeModulated(am());
        let w0 = d.omega0();
        let e0 = instantaneous_eigensystem(&d, 0.0);
        assert!((e0.e_plus - w0 / 2.0).abs() < 1e-15);
        assert_eq!(e0.basis_plus.bloch(), [1.0, 0.0, 0.0]);
        let eh = instantaneous_eigensystem(&d, 308.0);
        assert!((eh.e_plus - w0 / 4.0).abs() < 1e-15);
        assert_eq!(eh.e_plus + eh.e_minus, 0.0);
    }

    #[test]
    fn phase_eigensystem_equal_rates() {
        let d = PhaseDrive::new(0.01, 0.01).unwrap();
        let e = instantaneous_eigensystem(&DriveSpec::PhaseRotating(d), 123.0);
        assert!((e.e_plus - 0.01 / 2f64.sqrt()).abs() < 1e-15);
        assert!((d.alpha().abs() - PI / 4.0).abs() < 1e-15);
        assert!(e.basis_plus.is_pure(1e-12));
        let sum = e.basis_plus.vector() + e.basis_minus.vector();
        assert!(sum.norm() < 1e-12);
    }

    #[test]
    fn up_axis_is_positive_eigenvector_of_generator() {
        let d = PhaseDrive::from_period_and_angle(616.0, 0.5f64.atan()).unwrap();
        let h = nalgebra::Vector3::from(d.floquet_generator());
        let u = nalgebra::Vector3::from(d.up_axis());
        assert!((h.normalize() - u).norm() < 1e-14);
        assert!((h.norm() / 2.0 - d.e_theta()).abs() < 1e-16);
    }

    #[test]
    fn phase_integral_examples() {
        let d = am();
        let full = d.phase_integral(0.0, 616.0).unwrap();
        assert!((full - 0.75 * PI).abs() < 1e-14);
        assert_eq!(d.phase_integral(0.0, 0.0).unwrap(), 0.0);
        let half = d.phase_integral(0.0, 308.0).unwrap();
        assert!((half - 0.375 * d.omega0 * 616.0).abs() < 1e-14);
        assert!(d.phase_integral(5.0, 1.0).is_err());
    }

    #[test]
    fn phase_integral_matches_quadrature() {
        // Composite Simpson on a fine grid, independent of the antiderivative.
        let d = am();
        let (a, b) = (37.0, 1500.0);
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut s = d.omega(a) + d.omega(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * d.omega(a + k as f64 * h);
        }
        let simpson = s * h / 3.0;
        assert!((simpson - d.phase_integral(a, b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn amplitude_eigenstate_is_stationary() {
        let d = DriveSpec::AmplitudeModulated(am());
        let plus = instantaneous_eigensystem(&d, 0.0).basis_plus;
        let out = evolve_unitary(&plus, &d, 13.0, 977.0).unwrap();
        assert!(out.distance(&plus) < 1e-15);
    }

    #[test]
    fn floquet_up_state_returns_after_a_period() {
        let d = PhaseDrive::from_period_and_angle(1296.0, PI / 4.0).unwrap();
        let spec = DriveSpec::PhaseRotating(d);
        let up = instantaneous_eigensystem(&spec, 0.0).basis_plus;
        let out = evolve_unitary(&up, &spec, 0.0, d.tau_theta()).unwrap();
        assert!(out.distance(&up) < 1e-12);
    }

    #[test]
    fn half_period_overlap_for_equal_rates() {
        let d = PhaseDrive::new(0.02, 0.02).unwrap();
        let spec = DriveSpec::PhaseRotating(d);
        let up = instantaneous_eigensystem(&spec, 0.0).basis_plus;
        let out = evolve_unitary(&up, &spec, 0.0, PI / d.theta).unwrap();
        assert!((out.overlap(&up) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn backwards_propagation_rejected() {
        let d = DriveSpec::AmplitudeModulated(am());
        assert!(evolve_unitary(&QubitState::ket_zero(), &d, 2.0, 1.0).is_err());
    }

    #[test]
    fn invalid_drives_rejected() {
        assert!(AmplitudeDrive::new(0.0, 1.0).is_err());
        assert!(AmplitudeDrive::new(1.0, -1.0).is_err());
        assert!(PhaseDrive::new(1.0, 0.0).is_err());
        assert!(PhaseDrive::from_period_and_angle(616.0, 2.0).is_err());
    }
}
