//! Equilibrium quantities of the instantaneous (or Floquet) Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::drive::DriveSpec;
use crate::error::{invalid, Result};

/// Inverse temperatures in units of 1/(rad/ns). `beta_r = 0` encodes an
/// infinite reservoir pseudo-temperature; negative values are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalContext {
    pub beta: f64,
    pub beta_r: f64,
}

impl ThermalContext {
    pub fn new(beta: f64, beta_r: f64) -> Result<Self> {
        if !(beta.is_finite() && beta_r.is_finite()) {
            return Err(invalid("inverse temperatures must be finite"));
        }
        Ok(Self { beta, beta_r })
    }

    /// Exponent `beta - beta_r` of the exchange-type relation.
    pub fn delta_beta(&self) -> f64 {
        self.beta - self.beta_r
    }
}

/// Inverse temperature giving upper-level population `p_up` across `gap`.
pub fn beta_from_upper_population(p_up: f64, gap: f64) -> Result<f64> {
    if !(p_up > 0.0 && p_up < 1.0) {
        return Err(invalid(format!("population must lie in (0, 1), got {p_up}")));
    }
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(invalid(format!("gap must be > 0, got {gap}")));
    }
    Ok(((1.0 - p_up) / p_up).ln() / gap)
}

/// `Z(t) = 2 cosh(beta E_+(t))`.
pub fn partition_function(beta: f64, drive: &DriveSpec, t: f64) -> f64 {
    2.0 * (beta * drive.upper_energy(t)).cosh()
}

/// Gibbs weight of the upper level, `e^{-beta E_+}/Z`.
pub fn gibbs_population(beta: f64, drive: &DriveSpec, t: f64) -> f64 {
    // 1/(1 + e^{2 beta E}) written to stay finite for large |beta E|.
    let x = 2.0 * beta * drive.upper_energy(t);
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `Delta F = -ln(Z(tf)/Z(0)) / beta`.
pub fn free_energy_delta(beta: f64, drive: &DriveSpec, tf: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(invalid("free energy difference is undefined at beta = 0"));
    }
    if tf.is_nan() || tf < 0.0 {
        return Err(invalid(format!("tf must be >= 0, got {tf}")));
    }
    if let DriveSpec::PhaseRotating(_) = drive {
        return Ok(0.0);
    }
    Ok(-log_partition_ratio(beta, drive, tf) / beta)
}

/// `ln(Z(tf)/Z(0))`, evaluated without overflow.
pub fn log_partition_ratio(beta: f64, drive: &DriveSpec, tf: f64) -> f64 {
    let a = (beta * drive.upper_energy(tf)).abs();
    let b = (beta * drive.upper_energy(0.0)).abs();
    // ln cosh x = |x| + ln(1 + e^{-2|x|}) - ln 2
    let lc = |x: f64| x + (-2.0 * x).exp().ln_1p();
    lc(a) - lc(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::{AmplitudeDrive, PhaseDrive};
    use std::f64::consts::PI;

    fn am() -> DriveSpec {
        DriveSpec::AmplitudeModulated(AmplitudeDrive::new(PI / 616.0, 616.0).unwrap())
    }

    #[test]
    fn partition_function_examples() {
        let d = am();
        let beta = 2.0 / d.omega0();
        assert!((partition_function(beta, &d, 0.0) - 3.086_161_269_630_487_6).abs() < 1e-14);
        assert!((partition_function(beta, &d, 308.0) - 2.255_251_930_412_761_6).abs() < 1e-14);
        assert_eq!(partition_function(0.0, &d, 100.0), 2.0);
    }

    #[test]
    fn gibbs_population_examples() {
        let d = am();
        let beta = 2.0 / d.omega0();
        let expect = 1.0 / (1.0 + 1f64.exp().powi(2));
        assert!((gibbs_population(beta, &d, 0.0) - expect).abs() < 1e-15);
        assert_eq!(gibbs_population(0.0, &d, 0.0), 0.5);
        assert!(gibbs_population(1e6, &d, 0.0) >= 0.0);
        assert!((gibbs_population(-1e6, &d, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn free_energy_examples() {
        let d = am();
        let w0 = d.omega0();
        let beta = 2.0 / w0;
        assert!(free_energy_delta(beta, &d, 616.0 * 3.0).unwrap().abs() < 1e-15);
        let half = free_energy_delta(beta, &d, 308.0).unwrap();
        assert!((half / w0 - 0.156_833_161_762_374_83).abs() < 1e-13);
        assert!(free_energy_delta(0.0, &d, 1.0).is_err());
        let p = DriveSpec::PhaseRotating(PhaseDrive::new(0.005, 0.004).unwrap());
        assert_eq!(free_energy_delta(1.3, &p, 777.0).unwrap(), 0.0);
    }

    #[test]
    fn beta_from_population_inverts_gibbs() {
        let d = DriveSpec::PhaseRotating(PhaseDrive::from_period_and_angle(616.0, 0.5f64.atan()).unwrap());
        let gap = 2.0 * d.upper_energy(0.0);
        let beta = beta_from_upper_population(0.303, gap).unwrap();
        assert!((gibbs_population(beta, &d, 0.0) - 0.303).abs() < 1e-15);
        assert!(beta_from_upper_population(1.0, gap).is_err());
    }
}
