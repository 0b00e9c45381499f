use std::f64::consts::PI;

use lscov_sim::{replication_rng, MeanFunction, ModelKind, ProcessSpec};

/// Mean of `X_i X_j` over replications and its Monte Carlo standard error.
fn product_moment(samples: &[Vec<f64>], i: usize, j: usize) -> (f64, f64) {
    let r = samples.len() as f64;
    let prods: Vec<f64> = samples.iter().map(|e| e[i] * e[j]).collect();
    let mean = prods.iter().sum::<f64>() / r;
    let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

fn error_paths(spec: &ProcessSpec, n: usize, reps: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..reps).map(|r| spec.simulate(n, &mut replication_rng(seed, r as u64)).unwrap().epsilon).collect()
}

#[test]
fn model_b_variance_follows_frozen_ar1() {
    let n = 40;
    let spec = ProcessSpec::new(ModelKind::B, MeanFunction::I).with_law(lscov_sim::InnovationLaw::StdNormal);
    let truth = spec.true_covariance(n).unwrap();
    let paths = error_paths(&spec, n, 2000, 11);
    for i in [3usize, 10, 19, 33] {
        let t = (i + 1) as f64 / n as f64;
        let frozen = 0.64 / (1.0 - 0.49 * (2.0 * PI * t).sin().powi(2));
        assert!((truth.get(i, i) - frozen).abs() < 1e-9, "i = {i}");
        let (mc, se) = product_moment(&paths, i, i);
        assert!((mc - frozen).abs() <= 3.0 * se, "i = {i}: {mc} vs {frozen} (se {se})");
    }
    // t = 1/2 switches the autoregression off
    assert!((truth.get(19, 19) - 0.64).abs() < 1e-12);
}

#[test]
fn model_b_lag_one_is_frozen_coefficient_times_variance() {
    let n = 400;
    let spec = ProcessSpec::new(ModelKind::B, MeanFunction::I);
    let paths = error_paths(&spec, n, 10_000, 17);
    for i in [60usize, 130, 333] {
        let t = (i + 1) as f64 / n as f64;
        let a = 0.7 * (2.0 * PI * t).sin();
        let var = 0.64 / (1.0 - a * a);
        let (mc, se) = product_moment(&paths, i, i - 1);
        assert!((mc - a * var).abs() <= 3.0 * se, "i = {i}: {mc} vs {} (se {se})", a * var);
    }
}

#[test]
fn tvar6_truth_matches_monte_carlo_block() {
    let n = 24;
    let spec = ProcessSpec::new(ModelKind::TvAr6, MeanFunction::II);
    let truth = spec.true_covariance(n).unwrap();
    let paths = error_paths(&spec, n, 20_000, 5);
    let mut worst: f64 = 0.0;
    for i in 9..15 {
        for j in i..15 {
            let (mc, se) = product_moment(&paths, i, j);
            worst = worst.max((mc - truth.get(i, j)).abs() / se);
        }
    }
    assert!(worst <= 4.0, "largest deviation {worst} standard errors");
}

#[test]
fn paths_are_reproducible_per_replication() {
    let spec = ProcessSpec::new(ModelKind::D, MeanFunction::III);
    let a = spec.simulate(100, &mut replication_rng(3, 7)).unwrap();
    let b = spec.simulate(100, &mut replication_rng(3, 7)).unwrap();
    let c = spec.simulate(100, &mut replication_rng(3, 8)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.x, c.x);
    for (i, (x, e)) in a.x.iter().zip(&a.epsilon).enumerate() {
        let t = (i + 1) as f64 / 100.0;
        assert!((x - e - MeanFunction::III.eval(t)).abs() < 1e-12);
    }
}

#[test]
fn tvma6_has_seven_coefficients_and_width_six() {
    let spec = ProcessSpec::new(ModelKind::TvMa6, MeanFunction::I);
    for t in [0.0, 0.3, 0.77, 1.0] {
        assert_eq!(spec.ma_coefficients(t).unwrap().len(), 7);
    }
    assert_eq!(spec.true_covariance(50).unwrap().effective_width(), 6);
}

#[test]
fn model_c_rejects_skewed_innovations() {
    let spec = ProcessSpec::new(ModelKind::C, MeanFunction::I).with_law(lscov_sim::InnovationLaw::StdChiSq6);
    assert!(spec.simulate(50, &mut replication_rng(1, 0)).is_err());
}

proptest::proptest! {
    #[test]
    fn neglected_tail_is_below_tolerance(t in 0.0f64..=1.0, kind in proptest::sample::select(vec![ModelKind::A, ModelKind::B, ModelKind::TvAr6])) {
        let spec = ProcessSpec::new(kind, MeanFunction::I);
        let kept = spec.ma_coefficients(t).unwrap();
        let mut long = spec;
        long.tolerance = 1e-16;
        let full = long.ma_coefficients(t).unwrap();
        proptest::prop_assert!(full.len() >= kept.len());
        let tail: f64 = full[kept.len()..].iter().map(|c| c.abs()).sum();
        proptest::prop_assert!(tail <= 1e-10, "tail {} at t = {}", tail, t);
        for (a, b) in kept.iter().zip(&full) {
            proptest::prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
