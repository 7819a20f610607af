use frontlab_core::tracker::{estimate_speed, level_crossings, FrontTrace, SpeedOutcome};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recovers_linear_fronts(c in 0.2f64..3.0, offset in -5.0f64..5.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let times: Vec<f64> = (0..=120).map(|k| 0.5 * k as f64).collect();
        let xs: Vec<f64> = times.iter().map(|t| offset + c * t + 0.02 * (rng.gen::<f64>() - 0.5)).collect();
        let out = estimate_speed(&FrontTrace::from_samples(times, xs, 0.1), 0.5).unwrap();
        let e = out.estimate().unwrap();
        prop_assert!((e.c_hat - c).abs() < 5e-3, "{e:?}");
        prop_assert!((e.c_right - e.c_left).abs() < 1e-2);
    }

    #[test]
    fn crossings_bracket_the_plateau(center in -10.0f64..10.0, width in 2.0f64..8.0, theta in 0.05f64..0.95) {
        let nodes: Vec<f64> = (0..=800).map(|k| -40.0 + 0.1 * k as f64).collect();
        let profile: Vec<f64> = nodes.iter().map(|x| (-((x - center) / width).powi(2)).exp()).collect();
        let (l, r) = level_crossings(&nodes, &profile, theta).unwrap();
        let half = width * (-theta.ln()).sqrt();
        prop_assert!((r - (center + half)).abs() < 0.01);
        prop_assert!((l - (center - half)).abs() < 0.01);
    }
}

#[test]
fn short_traces_are_no_data() {
    let trace = FrontTrace::from_samples(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0], 0.1);
    assert!(matches!(
        estimate_speed(&trace, 0.5).unwrap(),
        SpeedOutcome::NoData { .. }
    ));
    let empty = FrontTrace::from_samples(Vec::new(), Vec::new(), 0.1);
    assert!(matches!(
        estimate_speed(&empty, 0.5).unwrap(),
        SpeedOutcome::NoData { samples: 0 }
    ));
}

#[test]
fn vanished_front_is_reported() {
    let mut trace = FrontTrace::from_samples((0..20).map(f64::from).collect(), vec![1.0; 20], 0.1);
    *trace.right.last_mut().unwrap() = None;
    assert!(matches!(
        estimate_speed(&trace, 0.5).unwrap(),
        SpeedOutcome::NoFront
    ));
}
