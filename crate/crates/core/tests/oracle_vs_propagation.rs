mod common;

use qfr_core::drive::Level;
use qfr_core::oracle::{
    amplitude_work_heat, floquet_population_recursion, mean_heat_phase, population_after_n_pulses, w_irr,
};
use qfr_core::protocol::propagated_energetics;
use qfr_core::thermal::{free_energy_delta, gibbs_population};

use common::*;

/// Worst recursion-vs-propagation population gap for the phase presets at
/// `p_a = 0.25`, over `n <= 50`, in preset order.
pub const PHASE_POPULATION_GAP: [f64; 3] = [0.09, 0.24, 0.42];
/// Same for the heat, in units of `E_theta`.
pub const PHASE_HEAT_GAP: [f64; 3] = [0.18, 0.48, 0.85];

#[test]
fn amplitude_closed_forms_match_propagation() {
    let w0 = am_drive().omega0();
    let mut worst: f64 = 0.0;
    for a in 0..10 {
        let pa = 0.05 + 0.1 * a as f64;
        for b in 0..10 {
            let tau = TAU_A * (0.1 + 0.2 * b as f64);
            let cfg = am_config(pa, tau, 50, 50.0 * tau + 0.37 * tau);
            let prop = propagated_energetics(&cfg).unwrap();
            let series = amplitude_work_heat(&cfg).unwrap();
            let p0 = cfg.gibbs_weights()[0];
            for n in 1..=50usize {
                let pop = population_after_n_pulses(p0, pa, n as u32);
                worst = worst.max((pop - prop.up_populations[n]).abs());
                worst = worst.max((series.per_pulse_work[n - 1] - prop.per_pulse_work[n - 1]).abs() / w0);
                worst = worst.max((series.per_pulse_heat[n - 1] - prop.per_pulse_heat[n - 1]).abs() / w0);
            }
            worst = worst.max((series.tail_work - prop.tail_work).abs() / w0);
            worst = worst.max((series.total_work - prop.total_work).abs() / w0);
            worst = worst.max((series.total_heat - prop.total_heat).abs() / w0);
        }
    }
    assert!(worst <= 1e-10, "worst gap {worst:e}");
}

#[test]
fn per_pulse_heat_is_geometric() {
    for pa in [0.1, 0.25, 0.6] {
        let cfg = am_config(pa, TAU_A, 12, 12.0 * TAU_A);
        let q = amplitude_work_heat(&cfg).unwrap().per_pulse_heat;
        for w in q.windows(2) {
            assert!((1.0 - w[1] / w[0] - pa).abs() < 1e-12);
        }
    }
}

#[test]
fn irreversible_work_is_nonnegative() {
    let drive = am_drive();
    let beta = 2.0 / drive.omega0();
    let p0 = gibbs_population(beta, &drive, 0.0);
    for k in 1..=100 {
        let tf = TAU_A * k as f64 / 101.0;
        let w = w_irr(beta, &drive, tf, Some(TAU_A)).unwrap();
        assert!(w >= -1e-12, "{tf}: {w}");
        // equals the relative entropy D(rho(tf) || gibbs(tf)) / beta
        let q = gibbs_population(beta, &drive, tf);
        let d = p0 * (p0 / q).ln() + (1.0 - p0) * ((1.0 - p0) / (1.0 - q)).ln();
        assert!((w - d / beta).abs() < 1e-12 * drive.omega0(), "{w} vs {}", d / beta);
        assert!(free_energy_delta(beta, &drive, tf).is_ok());
    }
}

#[test]
fn phase_recursion_gap_is_bounded() {
    for i in 0..3 {
        let cfg = phase_config(i, 0.25, 50);
        let phase = cfg.drive.as_phase().unwrap();
        let prop = propagated_energetics(&cfg).unwrap();
        let p0 = cfg.gibbs_weights()[Level::Plus.index()];
        let (mut pop_gap, mut heat_gap) = (0.0f64, 0.0f64);
        for n in 0..=50u32 {
            let rec = floquet_population_recursion(p0, 0.25, cfg.channel.p_pump, phase.alpha(), n);
            pop_gap = pop_gap.max((rec - prop.up_populations[n as usize]).abs());
            let c = cfg.with_schedule(n, cfg.tau * f64::from(n));
            let q_prop = propagated_energetics(&c).unwrap().total_heat;
            heat_gap = heat_gap.max((mean_heat_phase(&c).unwrap() - q_prop).abs() / phase.e_theta());
        }
        println!("phase preset {i}: population gap {pop_gap:.4e}, heat gap {heat_gap:.4e} E_theta");
        assert!(pop_gap <= PHASE_POPULATION_GAP[i]);
        assert!(heat_gap <= PHASE_HEAT_GAP[i]);
    }
}
