mod common;

use nalgebra::Matrix2;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use qfr_core::drive::{evolve_unitary, instantaneous_eigensystem, propagator, DriveSpec, PhaseDrive};
use qfr_core::state::QubitState;
use qfr_core::thermal::{free_energy_delta, partition_function};

use common::*;

fn bloch_of(rho: &Matrix2<C>) -> [f64; 3] {
    [2.0 * rho[(0, 1)].re, -2.0 * rho[(0, 1)].im, (rho[(0, 0)] - rho[(1, 1)]).re]
}

fn rho_of(s: &QubitState) -> Matrix2<C> {
    let [x, y, z] = s.bloch();
    Matrix2::new(C::new((1.0 + z) / 2.0, 0.0), C::new(x / 2.0, -y / 2.0), C::new(x / 2.0, y / 2.0), C::new((1.0 - z) / 2.0, 0.0))
}

#[test]
fn phase_period_matches_matrix_exponential() {
    for (w0, theta) in [(0.005, 0.005), (0.003, 0.0102), (0.02, 0.007)] {
        let pd = PhaseDrive::new(w0, theta).unwrap();
        let drive = DriveSpec::PhaseRotating(pd);
        let period = pd.tau_theta();
        let i = C::new(0.0, 1.0);
        let sx = Matrix2::new(C::from(0.0), C::from(1.0), C::from(1.0), C::from(0.0));
        let sz = Matrix2::new(C::from(1.0), C::from(0.0), C::from(0.0), C::from(-1.0));
        let hf = (sx * C::from(w0) - sz * C::from(theta)) * C::from(0.5);
        let u = (hf * (-i * C::from(period))).exp();
        for start in [QubitState::ket_zero(), QubitState::new(0.6, -0.3, 0.2).unwrap(), QubitState::new(0.0, 1.0, 0.0).unwrap()] {
            let steps = 37;
            let mut s = start;
            for k in 0..steps {
                let t0 = period * k as f64 / steps as f64;
                let t1 = period * (k + 1) as f64 / steps as f64;
                s = evolve_unitary(&s, &drive, t0, t1).unwrap();
            }
            let expect = bloch_of(&(u * rho_of(&start) * u.adjoint()));
            for (a, b) in s.bloch().iter().zip(expect) {
                assert!((a - b).abs() < 1e-10, "{:?} vs {expect:?}", s.bloch());
            }
        }
    }
}

#[test]
fn norm_survives_a_thousand_segments() {
    for drive in [am_drive(), phase_drive(2)] {
        let mut s = QubitState::new(0.3, -0.8, 0.5).unwrap();
        let n0 = s.norm();
        let mut t = 0.0;
        for k in 0..1000 {
            let dt = 1.0 + (k % 17) as f64 * 13.7;
            s = evolve_unitary(&s, &drive, t, t + dt).unwrap();
            t += dt;
        }
        assert!((s.norm() - n0).abs() < 1e-12);
    }
}

#[test]
fn free_energy_is_periodic() {
    let drive = am_drive();
    let beta = 2.0 / drive.omega0();
    for k in 0..100 {
        let tf = 2.0 * TAU_A * k as f64 / 100.0;
        let a = free_energy_delta(beta, &drive, tf).unwrap();
        let b = free_energy_delta(beta, &drive, tf + TAU_A).unwrap();
        assert!((a - b).abs() < 1e-12 * drive.omega0(), "{tf}: {a} vs {b}");
    }
}

proptest! {
    #[test]
    fn rotation_preserves_norm(x in -0.57f64..0.57, y in -0.57f64..0.57, z in -0.57f64..0.57,
                               t0 in 0.0f64..3000.0, dt in 0.0f64..3000.0, phase in any::<bool>()) {
        let drive = if phase { phase_drive(1) } else { am_drive() };
        let s = QubitState::new(x, y, z).unwrap();
        let out = propagator(&drive, t0, t0 + dt).unwrap().apply(&s);
        prop_assert!((out.norm() - s.norm()).abs() < 1e-12);
    }

    #[test]
    fn energies_are_opposite(t in 0.0f64..1e4, phase in any::<bool>()) {
        let drive = if phase { phase_drive(0) } else { am_drive() };
        let es = instantaneous_eigensystem(&drive, t);
        prop_assert_eq!(es.e_plus + es.e_minus, 0.0);
    }

    #[test]
    fn partition_function_at_least_two(beta in -5e3f64..5e3, t in 0.0f64..2000.0) {
        let drive = am_drive();
        let z = partition_function(beta, &drive, t);
        prop_assert!(z >= 2.0);
        prop_assert_eq!(partition_function(0.0, &drive, t), 2.0);
    }
}
