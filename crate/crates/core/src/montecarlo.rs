//! Reproducible stochastic-trajectory ensembles.
//!
//! Every trajectory owns a ChaCha8 stream selected by `(master_seed,
//! stream id)`, where the stream id is derived from the trajectory index
//! and the initialization. Results depend only on those ids, never on
//! scheduling: aggregation is done on integer counts.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_pulse, ProjectionOutcome, PulseEvent};
use crate::drive::Level;
use crate::error::{invalid, Error, Result};
use crate::protocol::{
    energy_change_distribution_weighted, fr_functional, fr_target, mean_energy_change, ConditionalMatrix, FrReport,
    GibbsWeighting, PropagationPlan, ProtocolConfig,
};
use crate::state::QubitState;

pub type Stream = ChaCha8Rng;

/// Independent random stream for one work item.
pub fn derive_stream(master_seed: u64, stream_id: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}

/// Which preparation a stream serves; keeps ids of different ensembles disjoint.
#[derive(Debug, Clone, Copy)]
enum Preparation {
    Eigenstate(Level),
    GibbsSampled,
}

fn stream_id(prep: Preparation, index: u64) -> u64 {
    let tag = match prep {
        Preparation::Eigenstate(Level::Plus) => 0,
        Preparation::Eigenstate(Level::Minus) => 1,
        Preparation::GibbsSampled => 2,
    };
    (index << 2) | tag
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub initial: Level,
    pub final_level: Level,
    pub pulse_events: Vec<PulseEvent>,
    /// Trajectory index within its ensemble.
    pub seed_index: u64,
}

/// Outcome counts for one initial eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ColumnCounts {
    pub trajectories: u64,
    pub ended_up: u64,
    pub pulses: u64,
    pub absorbed: u64,
}

impl ColumnCounts {
    fn add(self, o: ColumnCounts) -> ColumnCounts {
        ColumnCounts {
            trajectories: self.trajectories + o.trajectories,
            ended_up: self.ended_up + o.ended_up,
            pulses: self.pulses + o.pulses,
            absorbed: self.absorbed + o.absorbed,
        }
    }

    pub fn up_fraction(&self) -> f64 {
        self.ended_up as f64 / self.trajectories as f64
    }

    /// Binomial standard error `sqrt(p (1 - p) / N)` of the up fraction.
    pub fn std_err(&self) -> f64 {
        let p = self.up_fraction();
        (p * (1.0 - p) / self.trajectories as f64).sqrt()
    }
}

/// Empirical conditional frequencies, indexed by initial level (`+` first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub columns: [Option<ColumnCounts>; 2],
    pub master_seed: u64,
}

impl EnsembleStats {
    fn single(level: Level, counts: ColumnCounts, master_seed: u64) -> Self {
        let mut columns = [None, None];
        columns[level.index()] = Some(counts);
        Self { columns, master_seed }
    }

    pub fn column(&self, initial: Level) -> Option<&ColumnCounts> {
        self.columns[initial.index()].as_ref()
    }

    fn require(&self, initial: Level) -> Result<&ColumnCounts> {
        self.column(initial).ok_or(Error::IncompleteEnsemble(initial.symbol()))
    }

    /// Combine ensembles; columns present in both are summed.
    pub fn merge(&self, other: &EnsembleStats) -> Result<EnsembleStats> {
        if self.master_seed != other.master_seed {
            return Err(invalid("cannot merge ensembles drawn from different master seeds"));
        }
        let mut columns = [None, None];
        for (c, (a, b)) in columns.iter_mut().zip(self.columns.iter().zip(&other.columns)) {
            *c = match (a, b) {
                (Some(a), Some(b)) => Some(a.add(*b)),
                (Some(x), None) | (None, Some(x)) => Some(*x),
                (None, None) => None,
            };
        }
        Ok(EnsembleStats { columns, master_seed: self.master_seed })
    }

    pub fn n_trajectories(&self) -> u64 {
        self.columns.iter().flatten().map(|c| c.trajectories).sum()
    }

    pub fn conditional_estimate(&self) -> Result<ConditionalMatrix> {
        let plus = self.require(Level::Plus)?.up_fraction();
        let minus = self.require(Level::Minus)?.up_fraction();
        Ok(ConditionalMatrix::from_up_probabilities(plus, minus))
    }

    /// Binomial standard errors laid out like the conditional matrix.
    pub fn std_err(&self) -> Result<[[f64; 2]; 2]> {
        let plus = self.require(Level::Plus)?.std_err();
        let minus = self.require(Level::Minus)?.std_err();
        Ok([[plus, minus], [plus, minus]])
    }

    /// Fraction of pulses that were absorbed, over all trajectories.
    pub fn absorbed_fraction(&self) -> Option<f64> {
        let (p, a) = self
            .columns
            .iter()
            .flatten()
            .fold((0u64, 0u64), |(p, a), c| (p + c.pulses, a + c.absorbed));
        (p > 0).then(|| a as f64 / p as f64)
    }
}

fn simulate<R: Rng>(
    plan: &PropagationPlan,
    initial: Level,
    rng: &mut R,
    mut events: Option<&mut Vec<PulseEvent>>,
) -> (Level, u64) {
    let mut state: QubitState = plan.initial.basis(initial);
    let mut absorbed = 0;
    for u in &plan.pulse_segments {
        let (next, ev) = sample_pulse(&u.apply(&state), &plan.channel, rng);
        absorbed += u64::from(ev.absorbed);
        if let Some(log) = events.as_deref_mut() {
            log.push(ev);
        }
        state = next;
    }
    let p_up = plan.up_probability(&plan.tail.apply(&state));
    let last = if rng.random::<f64>() < p_up { Level::Plus } else { Level::Minus };
    (last, absorbed)
}

fn count_one(plan: &PropagationPlan, initial: Level, final_level: Level, absorbed: u64) -> ColumnCounts {
    let _ = initial;
    ColumnCounts {
        trajectories: 1,
        ended_up: u64::from(final_level == Level::Plus),
        pulses: plan.pulse_segments.len() as u64,
        absorbed,
    }
}

/// Sample `n` trajectories started in eigenstate `initial`.
pub fn run_trajectories(config: &ProtocolConfig, initial: Level, n: u64, master_seed: u64) -> Result<EnsembleStats> {
    if n == 0 {
        return Err(invalid("need at least one trajectory"));
    }
    let plan = config.plan()?;
    let counts = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(master_seed, stream_id(Preparation::Eigenstate(initial), i));
            let (last, absorbed) = simulate(&plan, initial, &mut rng, None);
            count_one(&plan, initial, last, absorbed)
        })
        .reduce(ColumnCounts::default, ColumnCounts::add);
    Ok(EnsembleStats::single(initial, counts, master_seed))
}

/// As [`run_trajectories`], also returning every trajectory's record in
/// index order.
pub fn run_trajectories_with_records(
    config: &ProtocolConfig,
    initial: Level,
    n: u64,
    master_seed: u64,
) -> Result<(EnsembleStats, Vec<TrajectoryRecord>)> {
    if n == 0 {
        return Err(invalid("need at least one trajectory"));
    }
    let plan = config.plan()?;
    let records: Vec<TrajectoryRecord> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(master_seed, stream_id(Preparation::Eigenstate(initial), i));
            let mut events = Vec::with_capacity(plan.pulse_segments.len());
            let (last, _) = simulate(&plan, initial, &mut rng, Some(&mut events));
            TrajectoryRecord { initial, final_level: last, pulse_events: events, seed_index: i }
        })
        .collect();
    let counts = records.iter().fold(ColumnCounts::default(), |acc, r| {
        let absorbed = r.pulse_events.iter().filter(|e| e.absorbed).count() as u64;
        acc.add(count_one(&plan, r.initial, r.final_level, absorbed))
    });
    Ok((EnsembleStats::single(initial, counts, master_seed), records))
}

/// Trajectories whose initial eigenstate is itself drawn from the Gibbs
/// distribution; counts land in the column of the drawn state.
pub fn run_gibbs_sampled(config: &ProtocolConfig, n: u64, master_seed: u64) -> Result<EnsembleStats> {
    if n == 0 {
        return Err(invalid("need at least one trajectory"));
    }
    let plan = config.plan()?;
    let p_plus = config.gibbs_weights()[0];
    let [plus, minus] = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(master_seed, stream_id(Preparation::GibbsSampled, i));
            let initial = if rng.random::<f64>() < p_plus { Level::Plus } else { Level::Minus };
            let (last, absorbed) = simulate(&plan, initial, &mut rng, None);
            let mut out = [ColumnCounts::default(); 2];
            out[initial.index()] = count_one(&plan, initial, last, absorbed);
            out
        })
        .reduce(|| [ColumnCounts::default(); 2], |a, b| [a[0].add(b[0]), a[1].add(b[1])]);
    let columns = [plus, minus].map(|c| (c.trajectories > 0).then_some(c));
    Ok(EnsembleStats { columns, master_seed })
}

/// Ensemble for `config` following its Gibbs weighting mode: `n` per
/// eigenstate when post-weighting, `2 n` Gibbs-drawn otherwise.
pub fn run_ensemble(config: &ProtocolConfig, n: u64, master_seed: u64) -> Result<EnsembleStats> {
    match config.gibbs_weighting {
        GibbsWeighting::PostWeight => {
            let plus = run_trajectories(config, Level::Plus, n, master_seed)?;
            let minus = run_trajectories(config, Level::Minus, n, master_seed)?;
            plus.merge(&minus)
        }
        GibbsWeighting::SampleInitial => run_gibbs_sampled(config, 2 * n, master_seed),
    }
}

/// Monte-Carlo estimate of `<exp(-gamma Delta E)>` with a standard error
/// propagated from the binomial errors of both columns.
pub fn fr_estimate_mc(stats: &EnsembleStats, config: &ProtocolConfig, gamma: f64) -> Result<FrReport> {
    let cm = stats.conditional_estimate()?;
    let se = stats.std_err()?;
    let weights = match config.gibbs_weighting {
        GibbsWeighting::PostWeight => config.gibbs_weights(),
        GibbsWeighting::SampleInitial => {
            let n = stats.n_trajectories() as f64;
            let plus = stats.require(Level::Plus)?.trajectories as f64;
            [plus / n, 1.0 - plus / n]
        }
    };
    let dist = energy_change_distribution_weighted(&cm, config, weights);
    let (e0, ef) = config.eigensystems();
    let variance: f64 = Level::BOTH
        .iter()
        .map(|&i| {
            let to_up = (-gamma * (ef.e_plus - e0.energy(i))).exp();
            let to_down = (-gamma * (ef.e_minus - e0.energy(i))).exp();
            let d = weights[i.index()] * (to_up - to_down) * se[0][i.index()];
            d * d
        })
        .sum();
    Ok(FrReport {
        mean_delta_e: mean_energy_change(&dist),
        fr_value: fr_functional(&dist, gamma),
        fr_target: fr_target(config),
        gamma,
        stderr: Some(variance.sqrt()),
    })
}

fn event_code(ev: &PulseEvent) -> char {
    match (ev.outcome, ev.pumped) {
        (None, _) => '.',
        (Some(ProjectionOutcome::Zero), _) => '0',
        (Some(ProjectionOutcome::One), Some(true)) => 'p',
        (Some(ProjectionOutcome::One), _) => '1',
    }
}

/// Dump records, one per line: `seed_index,initial,final,events`.
/// `events` has one character per pulse: `.` not absorbed, `0` projected on
/// `|0>`, `1` projected on `|1>` and not pumped, `p` projected on `|1>` and
/// pumped to `|0>`.
pub fn write_records<W: Write>(out: &mut W, records: &[TrajectoryRecord]) -> io::Result<()> {
    writeln!(out, "seed_index,initial,final,events")?;
    for r in records {
        let events: String = r.pulse_events.iter().map(event_code).collect();
        writeln!(out, "{},{},{},{}", r.seed_index, r.initial.symbol(), r.final_level.symbol(), events)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PulseChannelParams;
    use crate::drive::{AmplitudeDrive, DriveSpec};
    use crate::thermal::ThermalContext;
    use std::f64::consts::PI;

    fn am_config(pa: f64, n: u32) -> ProtocolConfig {
        let drive = DriveSpec::AmplitudeModulated(AmplitudeDrive::new(PI / 616.0, 616.0).unwrap());
        ProtocolConfig {
            drive,
            channel: PulseChannelParams::new(pa, 0.2).unwrap(),
            tau: 410.0,
            n_pulses: n,
            tf: 410.0 * f64::from(n) + 100.0,
            thermal: ThermalContext::new(2.0 / drive.omega0(), 0.0).unwrap(),
            gibbs_weighting: GibbsWeighting::PostWeight,
        }
    }

    #[test]
    fn same_stream_is_deterministic() {
        let a: Vec<u64> = (0..100).map({
            let mut r = derive_stream(99, 5);
            move |_| r.random()
        }).collect();
        let mut r = derive_stream(99, 5);
        let b: Vec<u64> = (0..100).map(|_| r.random()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn neighbouring_streams_are_uncorrelated() {
        let (mut s0, mut s1) = (derive_stream(2024, 0), derive_stream(2024, 1));
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| s0.random()).collect();
        let ys: Vec<f64> = (0..n).map(|_| s1.random()).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
        let (mx, my) = (mean(&xs), mean(&ys));
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        assert!((cov / (vx * vy).sqrt()).abs() < 0.05);
    }

    #[test]
    fn no_absorption_is_exact() {
        let stats = run_trajectories(&am_config(0.0, 5), Level::Plus, 2000, 1).unwrap();
        assert_eq!(stats.column(Level::Plus).unwrap().up_fraction(), 1.0);
        assert_eq!(stats.column(Level::Plus).unwrap().absorbed, 0);
    }

    #[test]
    fn missing_column_is_reported() {
        let cfg = am_config(0.3, 2);
        let stats = run_trajectories(&cfg, Level::Plus, 100, 1).unwrap();
        assert_eq!(fr_estimate_mc(&stats, &cfg, 0.1), Err(Error::IncompleteEnsemble("-")));
    }

    #[test]
    fn zero_gamma_has_no_spread() {
        let cfg = am_config(0.3, 3);
        let stats = run_ensemble(&cfg, 1000, 3).unwrap();
        let r = fr_estimate_mc(&stats, &cfg, 0.0).unwrap();
        assert!((r.fr_value - 1.0).abs() < 1e-15);
        assert_eq!(r.stderr, Some(0.0));
    }

    #[test]
    fn records_match_counts() {
        let cfg = am_config(0.4, 6);
        let (stats, recs) = run_trajectories_with_records(&cfg, Level::Minus, 500, 8).unwrap();
        assert_eq!(recs.len(), 500);
        assert!(recs.iter().all(|r| r.pulse_events.len() == 6));
        let up = recs.iter().filter(|r| r.final_level == Level::Plus).count() as u64;
        assert_eq!(stats.column(Level::Minus).unwrap().ended_up, up);
        let plain = run_trajectories(&cfg, Level::Minus, 500, 8).unwrap();
        assert_eq!(plain, stats);
        let mut buf = Vec::new();
        write_records(&mut buf, &recs[..2]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("0,-,"));
    }

    #[test]
    fn gibbs_sampled_mode_fills_both_columns() {
        let mut cfg = am_config(0.3, 2);
        cfg.gibbs_weighting = GibbsWeighting::SampleInitial;
        let stats = run_ensemble(&cfg, 20_000, 4).unwrap();
        let plus = stats.column(Level::Plus).unwrap().trajectories as f64;
        let p = cfg.gibbs_weights()[0];
        let n = 40_000.0;
        assert!((plus / n - p).abs() < 4.0 * (p * (1.0 - p) / n).sqrt());
        assert!(fr_estimate_mc(&stats, &cfg, 0.5).is_ok());
    }
}
