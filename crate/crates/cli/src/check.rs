//! Quick invariant suite behind `qfr check`.

use qfr_core::drive::Level;
use qfr_core::oracle::{amplitude_work_heat, rabi_conditional, w_irr};
use qfr_core::protocol::{
    conditional_matrix, energy_change_distribution, fr_functional, fr_target, mean_energy_change,
    one_period_beta_reservoir, propagated_energetics, ProtocolConfig,
};
use qfr_core::thermal::{free_energy_delta, ThermalContext};

use crate::presets;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, worst: f64, bound: f64) -> CheckResult {
    CheckResult { name, passed: worst <= bound, detail: format!("worst {worst:.3e}, bound {bound:.0e}") }
}

fn preset_points(name: &str) -> Result<(ProtocolConfig, Vec<(u32, f64)>), CliError> {
    let p = presets::find(name).ok_or_else(|| CliError::InvalidConfig(format!("unknown preset {name}")))?;
    let r = p.config.resolve()?;
    Ok((r.base, r.points))
}

pub fn run_checks() -> Result<Vec<CheckResult>, CliError> {
    let mut out = Vec::new();

    let (mut fr_worst, mut law_worst, mut col_worst, mut ineq_worst) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for name in ["fig4a", "fig4b"] {
        let (base, points) = preset_points(name)?;
        let w0 = base.drive.omega0();
        for (n, tf) in points {
            let cfg = base.with_schedule(n, tf);
            let cm = conditional_matrix(&cfg)?;
            col_worst = col_worst.max(cm.max_column_sum_error());
            let dist = energy_change_distribution(&cm, &cfg);
            fr_worst = fr_worst.max((fr_functional(&dist, cfg.thermal.beta) - fr_target(&cfg)).abs());
            let s = amplitude_work_heat(&cfg)?;
            let de = mean_energy_change(&dist);
            law_worst = law_worst.max((de - s.total_work - s.total_heat).abs() / w0);
            ineq_worst = ineq_worst.max((free_energy_delta(cfg.thermal.beta, &cfg.drive, tf)? - de) / w0);
        }
    }
    out.push(result("amplitude fluctuation relation", fr_worst, 1e-9));
    out.push(result("amplitude first law", law_worst, 1e-9));
    out.push(result("conditional columns sum to one", col_worst, 1e-12));
    out.push(CheckResult {
        name: "<dE> >= dF without reservoir",
        passed: ineq_worst <= 1e-12,
        detail: format!("largest dF - <dE> {ineq_worst:.3e} omega0"),
    });

    let mut gap: f64 = 0.0;
    for name in ["fig3a", "fig3b"] {
        let (base, points) = preset_points(name)?;
        let w0 = base.drive.omega0();
        for (n, tf) in points {
            let cfg = base.with_schedule(n, tf);
            let (s, p) = (amplitude_work_heat(&cfg)?, propagated_energetics(&cfg)?);
            gap = gap.max((s.total_work - p.total_work).abs().max((s.total_heat - p.total_heat).abs()) / w0);
        }
    }
    out.push(result("amplitude closed forms vs propagation", gap, 1e-10));

    let mut exchange: f64 = 0.0;
    for name in ["fig6d", "fig6e", "fig6f"] {
        let (base, _) = preset_points(name)?;
        let beta_r = one_period_beta_reservoir(&base.drive, &base.channel, base.tau)?;
        let cfg = ProtocolConfig { thermal: ThermalContext::new(base.thermal.beta, beta_r)?, ..base }.with_schedule(1, base.tau);
        let dist = energy_change_distribution(&conditional_matrix(&cfg)?, &cfg);
        exchange = exchange.max((fr_functional(&dist, cfg.thermal.delta_beta()) - 1.0).abs());
    }
    out.push(result("one-pulse exchange relation", exchange, 1e-10));

    let (base, points) = preset_points("fig5a")?;
    let pd = base.drive.as_phase().expect("fig5a uses the phase drive");
    let mut rabi: f64 = 0.0;
    for (n, tf) in points {
        let cm = conditional_matrix(&base.with_schedule(n, tf))?;
        rabi = rabi.max((cm.get(Level::Plus, Level::Plus) - rabi_conditional(pd.omega0, pd.theta, tf)).abs());
    }
    out.push(result("pulse-free Rabi formula", rabi, 1e-9));

    let (base, _) = preset_points("fig3b")?;
    let tau_a = base.drive.as_amplitude().expect("fig3b uses the amplitude drive").tau_a;
    let mut lowest = f64::INFINITY;
    for k in 1..=100 {
        let tf = tau_a * f64::from(k) / 101.0;
        lowest = lowest.min(w_irr(base.thermal.beta, &base.drive, tf, Some(tau_a))? / base.drive.omega0());
    }
    out.push(CheckResult {
        name: "irreversible work nonnegative",
        passed: lowest >= -1e-12,
        detail: format!("minimum {lowest:.3e} omega0"),
    });
    Ok(out)
}
