mod common;

use proptest::prelude::*;
use qfr_core::channel::{apply_pulse_map, sample_pulse, PulseChannelParams};
use qfr_core::montecarlo::derive_stream;
use qfr_core::state::QubitState;
use rand::Rng;

fn random_state<R: Rng>(rng: &mut R) -> QubitState {
    loop {
        let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if v.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return QubitState::new(v[0], v[1], v[2]).unwrap();
        }
    }
}

#[test]
fn outputs_stay_in_the_ball() {
    let mut rng = derive_stream(11, 0);
    for _ in 0..10_000 {
        let p = PulseChannelParams::new(rng.random(), rng.random()).unwrap();
        let out = apply_pulse_map(&random_state(&mut rng), &p);
        assert!(out.norm() <= 1.0 + 1e-15);
    }
}

#[test]
fn sampled_mean_matches_map() {
    let p = PulseChannelParams::new(0.35, 0.6).unwrap();
    let s = QubitState::new(0.4, -0.2, -0.5).unwrap();
    let expect = apply_pulse_map(&s, &p);
    let n = 100_000;
    let mut rng = derive_stream(5, 3);
    let mut sum = [0.0; 3];
    let mut sq = [0.0; 3];
    for _ in 0..n {
        let (out, _) = sample_pulse(&s, &p, &mut rng);
        for (k, c) in out.bloch().iter().enumerate() {
            sum[k] += c;
            sq[k] += c * c;
        }
    }
    for k in 0..3 {
        let mean = sum[k] / n as f64;
        let var = sq[k] / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt().max(1e-12);
        assert!((mean - expect.bloch()[k]).abs() < 4.0 * se, "component {k}: {mean} vs {}", expect.bloch()[k]);
    }
}

proptest! {
    #[test]
    fn map_is_affine(pa in 0.0f64..=1.0, pd in 0.0f64..=1.0, w in 0.0f64..=1.0, seed in any::<u64>()) {
        let mut rng = derive_stream(seed, 0);
        let (a, b) = (random_state(&mut rng), random_state(&mut rng));
        let p = PulseChannelParams::new(pa, pd).unwrap();
        let lhs = apply_pulse_map(&a.mix(&b, w), &p);
        let rhs = apply_pulse_map(&a, &p).mix(&apply_pulse_map(&b, &p), w);
        prop_assert!(lhs.distance(&rhs) < 1e-12);
        prop_assert!((lhs.norm() - 1.0) <= 1e-12);
    }

    #[test]
    fn x_population_recursion(pa in 0.0f64..=1.0, pd in 0.0f64..=1.0, seed in any::<u64>()) {
        let mut rng = derive_stream(seed, 1);
        let s = random_state(&mut rng);
        let p = PulseChannelParams::new(pa, pd).unwrap();
        let before = (1.0 + s.bloch()[0]) / 2.0;
        let after = (1.0 + apply_pulse_map(&s, &p).bloch()[0]) / 2.0;
        prop_assert!((after - ((1.0 - pa) * before + pa / 2.0)).abs() < 1e-12);
    }
}
