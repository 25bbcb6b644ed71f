mod common;

use common::{gaussian, mean_sd, naive_statistic, naive_variance, named_weights, rel_close};
use hdsign::signcore::SpatialSigns;
use hdsign::simulation::{Pattern, Replicator, Scenario, ScenarioSpec};
use hdsign::{run_test, variance_estimator, weighted_sign_statistic, SampleMatrix, WeightFunction};
use proptest::prelude::*;

#[test]
fn reduction_matches_pair_sum_on_seeded_gaussian() {
    let x = gaussian(5, 3, 11);
    let fast = weighted_sign_statistic(&x, &WeightFunction::Os).unwrap();
    let slow = naive_statistic(&x, &WeightFunction::Os);
    assert!(rel_close(fast, slow, 1e-12), "{fast} vs {slow}");
}

#[test]
fn variance_matches_triple_loop_on_seeded_gaussian() {
    let x = gaussian(10, 20, 12);
    let fast = variance_estimator(&x, &WeightFunction::Ss).unwrap();
    let slow = naive_variance(&x, &WeightFunction::Ss);
    assert!(rel_close(fast, slow, 1e-12), "{fast} vs {slow}");
}

#[test]
fn global_rescaling_leaves_decision_unchanged() {
    let x = gaussian(15, 40, 3).centered_at(&vec![-0.3; 40]).unwrap();
    for k in named_weights() {
        let a = run_test(&x, &k, 0.05).unwrap();
        let b = run_test(&x.scaled(7.3).unwrap(), &k, 0.05).unwrap();
        assert!(rel_close(a.z, b.z, 1e-10), "{k}");
        assert!((a.p_value - b.p_value).abs() < 1e-10);
        assert_eq!(a.reject, b.reject);
    }
}

#[test]
fn hypothesized_location_is_subtracted() {
    let x = gaussian(12, 10, 8);
    let theta0 = vec![0.25; 10];
    let shifted = x.centered_at(&[-0.25; 10]).unwrap();
    let direct = run_test(&x, &WeightFunction::Os, 0.05).unwrap();
    let recentered = run_test(&shifted.centered_at(&theta0).unwrap(), &WeightFunction::Os, 0.05).unwrap();
    assert!(rel_close(direct.statistic, recentered.statistic, 1e-12));
    assert!(rel_close(direct.z, recentered.z, 1e-10));
}

fn matrix_strategy() -> impl Strategy<Value = SampleMatrix> {
    (3usize..10, 2usize..12).prop_flat_map(|(n, p)| {
        prop::collection::vec(-10.0f64..10.0, n * p)
            .prop_filter("rows away from the origin", move |v| {
                v.chunks(p).all(|r| r.iter().map(|x| x * x).sum::<f64>() > 1e-6)
            })
            .prop_map(move |v| SampleMatrix::new(v, n, p).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_equals_double_sum(x in matrix_strategy()) {
        for k in named_weights() {
            let fast = weighted_sign_statistic(&x, &k).unwrap();
            let slow = naive_statistic(&x, &k);
            // cancellation: compare against the scale of the summands
            let scale: f64 = SpatialSigns::new(&x).weights(&k).unwrap().iter().map(|w| w * w).sum::<f64>()
                / (x.n() as f64 * (x.n() as f64 - 1.0));
            prop_assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(scale), "{} {} {}", k, fast, slow);
        }
    }

    #[test]
    fn permutation_invariance(x in matrix_strategy(), seed in any::<u64>()) {
        let n = x.n();
        let mut order: Vec<usize> = (0..n).collect();
        // deterministic shuffle from the seed
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let y = x.permuted(&order).unwrap();
        for k in named_weights() {
            let (a, b) = (weighted_sign_statistic(&x, &k).unwrap(), weighted_sign_statistic(&y, &k).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
            let (va, vb) = (variance_estimator(&x, &k).unwrap(), variance_estimator(&y, &k).unwrap());
            prop_assert!((va - vb).abs() <= 1e-10 * va.abs().max(1e-300));
        }
    }

    #[test]
    fn scale_equivariance(x in matrix_strategy(), c in 0.05f64..20.0) {
        let y = x.scaled(c).unwrap();
        let powers = [(WeightFunction::Os, -2), (WeightFunction::Ss, 0), (WeightFunction::Cq, 2)];
        for (k, power) in powers {
            let a = weighted_sign_statistic(&x, &k).unwrap();
            let b = weighted_sign_statistic(&y, &k).unwrap();
            let expected = c.powi(power) * a;
            let scale = SpatialSigns::new(&y).weights(&k).unwrap().iter().map(|w| w * w).sum::<f64>();
            prop_assert!((b - expected).abs() <= 1e-11 * scale, "{} {} {}", k, b, expected);
            let (va, vb) = (variance_estimator(&x, &k).unwrap(), variance_estimator(&y, &k).unwrap());
            if va > 1e-20 {
                let za = a / va.sqrt();
                let zb = b / vb.sqrt();
                prop_assert!((za - zb).abs() <= 1e-8 * za.abs().max(1.0));
            }
        }
    }

    #[test]
    fn negation_preserves_everything(x in matrix_strategy()) {
        let y = x.scaled(-1.0).unwrap();
        for k in named_weights() {
            let (a, b) = (weighted_sign_statistic(&x, &k).unwrap(), weighted_sign_statistic(&y, &k).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-12));
            let (va, vb) = (variance_estimator(&x, &k).unwrap(), variance_estimator(&y, &k).unwrap());
            prop_assert!((va - vb).abs() <= 1e-10 * va.max(1e-300), "{} {} {}", k, va, vb);
        }
    }
}

#[test]
fn null_z_is_standard_normal_ish() {
    let spec = ScenarioSpec::standard(Scenario::I, 40, 200, Pattern::Null, 2000, 2024).unwrap();
    let outcomes = Replicator::new(&spec).unwrap().outcomes().unwrap();
    // index 2 is OS
    let z: Vec<f64> = outcomes.iter().map(|o| o[2].as_ref().unwrap().z).collect();
    let (mean, sd) = mean_sd(&z);
    assert!(mean.abs() < 0.1, "mean {mean}");
    assert!((sd - 1.0).abs() < 0.1, "sd {sd}");
}

#[test]
fn alternative_mean_is_centered_at_signal() {
    let spec = ScenarioSpec::standard(Scenario::I, 40, 200, Pattern::Dense, 600, 77).unwrap();
    let theta_norm2: f64 = spec.theta().unwrap().iter().map(|t| t * t).sum();
    let replicator = Replicator::new(&spec).unwrap();
    for k in named_weights() {
        let mut stats = Vec::new();
        let mut centers = Vec::new();
        for r in 0..spec.replications {
            let x = replicator.sample(r).unwrap();
            let signs = SpatialSigns::new(&x);
            stats.push(signs.statistic(&k).unwrap());
            let c0 = signs.radii().iter().map(|r| k.eval(*r) / r).sum::<f64>() / x.n() as f64;
            centers.push(c0 * c0 * theta_norm2);
        }
        let (mean, sd) = mean_sd(&stats);
        let center = centers.iter().sum::<f64>() / centers.len() as f64;
        let se = sd / (stats.len() as f64).sqrt();
        assert!(
            (mean - center).abs() < 3.0 * se,
            "{k}: mean {mean}, center {center}, se {se}"
        );
    }
}
