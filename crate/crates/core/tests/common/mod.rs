#![allow(dead_code)]

use std::f64::consts::PI;

use qfr_core::channel::{invert_pump_probability, PulseChannelParams};
use qfr_core::drive::{AmplitudeDrive, DriveSpec, PhaseDrive};
use qfr_core::protocol::{GibbsWeighting, ProtocolConfig};
use qfr_core::thermal::{beta_from_upper_population, ThermalContext};

pub const TAU_A: f64 = 616.0;

pub fn am_drive() -> DriveSpec {
    DriveSpec::AmplitudeModulated(AmplitudeDrive::new(PI / TAU_A, TAU_A).unwrap())
}

pub fn am_config(p_absorb: f64, tau: f64, n: u32, tf: f64) -> ProtocolConfig {
    let drive = am_drive();
    ProtocolConfig {
        drive,
        channel: PulseChannelParams::new(p_absorb, 0.0).unwrap(),
        tau,
        n_pulses: n,
        tf,
        thermal: ThermalContext::new(2.0 / drive.omega0(), 0.0).unwrap(),
        gibbs_weighting: GibbsWeighting::PostWeight,
    }
}

/// (tau_theta, |alpha|, target P_up at infinity, P_up(0)).
pub const PHASE_PRESETS: [(f64, f64, f64, f64); 3] =
    [(1296.0, PI / 4.0, 0.276, 0.509), (616.0, 0.463_647_609_000_806_1, 0.138, 0.303), (308.0, 0.244_978_663_126_864_15, 0.050, 0.126)];

pub fn phase_drive(i: usize) -> DriveSpec {
    let (tt, a, _, _) = PHASE_PRESETS[i];
    DriveSpec::PhaseRotating(PhaseDrive::from_period_and_angle(tt, a).unwrap())
}

/// Phase preset with the pump probability inverted against its target.
pub fn phase_config(i: usize, p_absorb: f64, n: u32) -> ProtocolConfig {
    let (tt, _, target, p0) = PHASE_PRESETS[i];
    let drive = phase_drive(i);
    let pd = invert_pump_probability(&drive, p_absorb, tt, target).unwrap_or(0.0);
    let gap = 2.0 * drive.as_phase().unwrap().e_theta();
    ProtocolConfig {
        drive,
        channel: PulseChannelParams::new(p_absorb, pd).unwrap(),
        tau: tt,
        n_pulses: n,
        tf: tt * f64::from(n),
        thermal: ThermalContext::new(beta_from_upper_population(p0, gap).unwrap(), 0.0).unwrap(),
        gibbs_weighting: GibbsWeighting::PostWeight,
    }
}
