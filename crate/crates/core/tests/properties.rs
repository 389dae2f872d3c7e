use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rppl::dist::{self, Distribution};
use rppl::ds::Conditional;
use rppl::infer::{effective_sample_size, normalized_weights, systematic_indices};
use rppl::Value;

proptest! {
    #[test]
    fn normalized_weights_sum_to_one(ws in prop::collection::vec(-50.0f64..50.0, 1..64)) {
        let w = normalized_weights(&ws).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(w.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn systematic_indices_are_sorted_and_in_range(
        ws in prop::collection::vec(-10.0f64..10.0, 1..40),
        n in 1usize..100,
        seed in any::<u64>(),
    ) {
        let w = normalized_weights(&ws).unwrap();
        let idx = systematic_indices(&w, n, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(idx.len(), n);
        prop_assert!(idx.windows(2).all(|p| p[0] <= p[1]));
        prop_assert!(idx.iter().all(|&i| i < w.len() && w[i] > 0.0));
    }

    #[test]
    fn effective_sample_size_is_between_one_and_n(ws in prop::collection::vec(-20.0f64..20.0, 1..50)) {
        let w = normalized_weights(&ws).unwrap();
        let ess = effective_sample_size(&w);
        prop_assert!(ess >= 1.0 - 1e-9 && ess <= w.len() as f64 + 1e-9);
    }

    #[test]
    fn gaussian_posterior_matches_brute_force(
        m in -5.0f64..5.0, s in 0.1f64..5.0,
        a in -3.0f64..3.0, b in -2.0f64..2.0, v in 0.1f64..3.0,
        x in -5.0f64..5.0,
    ) {
        let cond = Conditional::GaussianOfAffine { a, b, var: v };
        let post = cond.posterior(&Distribution::Gaussian(m, s), &Value::Float(x)).unwrap();
        // Normalize prior times likelihood on a wide grid.
        let n = 200_000;
        let (lo, hi) = (-60.0, 60.0);
        let h = (hi - lo) / n as f64;
        let logw = |y: f64| -(y - m).powi(2) / (2.0 * s) - (x - a * y - b).powi(2) / (2.0 * v);
        let top = (0..=n).map(|i| logw(lo + h * i as f64)).fold(f64::NEG_INFINITY, f64::max);
        let (mut z, mut mean, mut sq) = (0.0, 0.0, 0.0);
        for i in 0..=n {
            let y = lo + h * i as f64;
            let w = (logw(y) - top).exp();
            z += w;
            mean += w * y;
            sq += w * y * y;
        }
        let mean = mean / z;
        let var = sq / z - mean * mean;
        match post {
            Distribution::Gaussian(pm, pv) => {
                prop_assert!((pm - mean).abs() < 1e-6, "{} vs {}", pm, mean);
                prop_assert!((pv - var).abs() < 1e-6 * pv.max(1e-3), "{} vs {}", pv, var);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn beta_posterior_counts_outcomes(a in 0.1f64..10.0, b in 0.1f64..10.0, ys in prop::collection::vec(any::<bool>(), 0..30)) {
        let mut d = Distribution::Beta(a, b);
        for y in &ys {
            d = Conditional::BernoulliOfBeta.posterior(&d, &Value::Bool(*y)).unwrap();
        }
        let heads = ys.iter().filter(|y| **y).count() as f64;
        match d {
            Distribution::Beta(pa, pb) => {
                prop_assert!((pa - a - heads).abs() < 1e-9);
                prop_assert!((pb - b - (ys.len() as f64 - heads)).abs() < 1e-9);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn mixtures_are_normalized(ws in prop::collection::vec(0.01f64..10.0, 1..10)) {
        let comps: Vec<(Distribution, f64)> =
            ws.iter().enumerate().map(|(i, w)| (Distribution::Dirac(Value::Float(i as f64)), *w)).collect();
        let total: f64 = ws.iter().sum();
        let expected: f64 = ws.iter().enumerate().map(|(i, w)| i as f64 * w).sum::<f64>() / total;
        let d = dist::mixture(comps).unwrap();
        prop_assert!((d.mean().unwrap().as_f64().unwrap() - expected).abs() < 1e-9);
    }
}
