//! Parameter sets of the published figures.

use std::f64::consts::PI;

use crate::config::{
    ChannelConfig, DriveConfig, Mode, MonteCarloConfig, OutputConfig, ProtocolSection, ReservoirMode, ScenarioConfig,
    SweepConfig,
};

pub const TAU_A: f64 = 616.0;

pub struct Preset {
    pub name: &'static str,
    pub summary: String,
    pub config: ScenarioConfig,
}

/// (tau_theta, |alpha|, label, target P_up at infinity, P_up(0)).
const PHASE: [(f64, f64, &str, f64, f64); 3] = [
    (1296.0, PI / 4.0, "π/4", 0.276, 0.509),
    (616.0, 0.463_647_609_000_806_1, "arctan(1/2)", 0.138, 0.303),
    (308.0, 0.244_978_663_126_864_15, "arctan(1/4)", 0.050, 0.126),
];

fn amplitude(name: &str, tau: f64, sweep: SweepConfig) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        mode: Mode::Deterministic,
        drive: DriveConfig::AmplitudeModulated { tau_a: TAU_A, omega0: None },
        channel: ChannelConfig { p_absorb: 0.25, p_pump: Some(0.0), target_p_up_infinity: None },
        protocol: ProtocolSection {
            tau,
            beta: None,
            beta_times_omega0: Some(2.0),
            initial_p_up: None,
            reservoir: ReservoirMode::None,
            beta_r: None,
            sweep,
        },
        montecarlo: MonteCarloConfig::default(),
        output: OutputConfig::default(),
    }
}

fn amplitude_grid(name: &str, tau: f64, points: usize) -> ScenarioConfig {
    let max_pulses = 12;
    let stop = (f64::from(max_pulses) + 1.0) * tau;
    amplitude(name, tau, SweepConfig::TfGrid { start: 0.0, stop, points, max_pulses })
}

fn phase(name: &str, i: usize, n_max: u32, reservoir: ReservoirMode) -> ScenarioConfig {
    let (tau_theta, alpha, _, target, p0) = PHASE[i];
    ScenarioConfig {
        name: name.into(),
        mode: Mode::Deterministic,
        drive: DriveConfig::PhaseRotating { tau_theta, alpha: Some(alpha), omega0: None },
        channel: ChannelConfig { p_absorb: 0.25, p_pump: None, target_p_up_infinity: Some(target) },
        protocol: ProtocolSection {
            tau: tau_theta,
            beta: None,
            beta_times_omega0: None,
            initial_p_up: Some(p0),
            reservoir,
            beta_r: None,
            sweep: SweepConfig::PulseCount { n_min: 0, n_max, tf_offset: 0.0 },
        },
        montecarlo: MonteCarloConfig::default(),
        output: OutputConfig::default(),
    }
}

pub fn catalog() -> Vec<Preset> {
    let mut out = vec![
        Preset {
            name: "fig2a",
            summary: "conditional probabilities vs t_f, amplitude drive, τ = 410 ns, τ_A = 616 ns".into(),
            config: amplitude_grid("fig2a", 410.0, 200),
        },
        Preset {
            name: "fig2bcd",
            summary: "mean Bloch trajectories from both eigenstates, amplitude drive, τ = 410 ns".into(),
            config: amplitude("fig2bcd", 410.0, SweepConfig::PulseCount { n_min: 0, n_max: 12, tf_offset: 0.0 }),
        },
        Preset {
            name: "fig3a",
            summary: "⟨ΔE⟩, ⟨W⟩, ⟨Q⟩, ΔF vs t_f, amplitude drive, τ = 410 ns, β = 2/ω₀".into(),
            config: amplitude_grid("fig3a", 410.0, 200),
        },
        Preset {
            name: "fig3b",
            summary: "⟨ΔE⟩, ⟨W⟩, ⟨Q⟩, ΔF vs t_f, amplitude drive, τ = τ_A = 616 ns, β = 2/ω₀".into(),
            config: amplitude_grid("fig3b", TAU_A, 209),
        },
        Preset {
            name: "fig4a",
            summary: "⟨exp(-β ΔE)⟩ vs Z(t_f)/Z(0), amplitude drive, τ = 410 ns, β = 2/ω₀".into(),
            config: amplitude_grid("fig4a", 410.0, 50),
        },
        Preset {
            name: "fig4b",
            summary: "⟨exp(-β ΔE)⟩ vs Z(t_f)/Z(0), amplitude drive, τ = 616 ns, β = 2/ω₀".into(),
            config: amplitude_grid("fig4b", TAU_A, 50),
        },
    ];
    let mut fig5a = phase("fig5a", 1, 0, ReservoirMode::None);
    fig5a.channel = ChannelConfig { p_absorb: 0.0, p_pump: Some(0.0), target_p_up_infinity: None };
    fig5a.protocol.sweep = SweepConfig::TfGrid { start: 0.0, stop: 2.0 * 616.0, points: 200, max_pulses: 0 };
    out.push(Preset {
        name: "fig5a",
        summary: "pulse-free Rabi oscillation, τ_θ = 616 ns, α = arctan(1/2)".into(),
        config: fig5a,
    });
    for (i, (tt, _, label, target, p0)) in PHASE.iter().enumerate() {
        let name = ["fig5b", "fig5c", "fig5d"][i];
        out.push(Preset {
            name,
            summary: format!("{name}: τ_θ = {tt} ns, α = {label}, P_↑^∞ = {target}, N_L ≤ 50"),
            config: phase(name, i, 50, ReservoirMode::None),
        });
        let name = ["fig6a", "fig6b", "fig6c"][i];
        out.push(Preset {
            name,
            summary: format!("{name}: P_↑(0) = {p0}, τ_θ = {tt} ns, α = {label}, ⟨ΔE⟩ vs ⟨Q⟩"),
            config: phase(name, i, 20, ReservoirMode::FixedPoint),
        });
        let name = ["fig6d", "fig6e", "fig6f"][i];
        out.push(Preset {
            name,
            summary: format!("{name}: P_↑(0) = {p0}, τ_θ = {tt} ns, α = {label}, ⟨exp(-(β - β_R) ΔE)⟩"),
            config: phase(name, i, 20, ReservoirMode::FixedPoint),
        });
    }
    out.sort_by_key(|p| p.name);
    out
}

/// Look up a preset; `fig4`, `fig5` and `fig6` select the first panel.
pub fn find(name: &str) -> Option<Preset> {
    let name = match name {
        "fig4" => "fig4a",
        "fig5" => "fig5b",
        "fig6" => "fig6a",
        n => n,
    };
    catalog().into_iter().find(|p| p.name == name)
}

/// Catalog lines `name: summary`, restricted to names containing `filter`.
pub fn list(filter: &str) -> Vec<String> {
    catalog()
        .into_iter()
        .filter(|p| p.name.contains(filter))
        .map(|p| if p.summary.starts_with(p.name) { p.summary } else { format!("{}: {}", p.name, p.summary) })
        .collect()
}
