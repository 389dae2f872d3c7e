use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rppl::bench::{
    build_benchmark, generate, kalman_oracle, lqr_gain, run_benchmark, Benchmark, Params,
};
use rppl::{EngineConfig, EngineKind, Value};

fn sds(seed: u64, particles: usize) -> EngineConfig {
    EngineConfig { kind: EngineKind::Sds, particles: Some(particles), ess_resampling: false, seed }
}

#[test]
fn data_is_reproducible() {
    for b in Benchmark::all() {
        let p = Params::default();
        assert_eq!(generate(b, &p, 50).unwrap(), generate(b, &p, 50).unwrap(), "{}", b);
        let q = Params { data_seed: 7, ..Params::default() };
        assert_ne!(generate(b, &p, 50).unwrap().inputs, generate(b, &q, 50).unwrap().inputs, "{}", b);
    }
}

#[test]
fn a_certain_coin_always_lands_heads() {
    let p = Params { coin_bias: Some(1.0), ..Params::default() };
    let data = generate(Benchmark::BetaBernoulli, &p, 200).unwrap();
    assert!(data.inputs.iter().all(|v| *v == Value::Bool(true)));
}

#[test]
fn outlier_clutter_rate() {
    // Averaged over data seeds the rate is the prior mean 100 / 1100.
    let mut rates = Vec::new();
    for seed in 0..20 {
        let p = Params { data_seed: seed, ..Params::default() };
        let data = generate(Benchmark::Outlier, &p, 10_000).unwrap();
        let n = data.truth.iter().filter(|t| t[0] == 1.0).count();
        rates.push(n as f64 / 10_000.0);
    }
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    assert!((mean - 100.0 / 1100.0).abs() < 0.01, "{}", mean);
    assert!(rates.iter().all(|r| (r - 0.0909).abs() < 0.04), "{:?}", rates);
}

#[test]
fn kalman_run_under_sds_is_the_kalman_filter() {
    let spec = build_benchmark(Benchmark::Kalman1d, Params::default());
    let data = generate(Benchmark::Kalman1d, &spec.params, 500).unwrap();
    let obs: Vec<Option<f64>> = data.inputs.iter().map(|v| Some(v.as_f64().unwrap())).collect();
    let oracle = kalman_oracle(0.0, 2500.0, 1.0, 1.0, &obs);
    let out = run_benchmark(&spec, sds(7, 1), 500).unwrap();
    let mut mse = 0.0;
    for (t, (row, (m, v))) in out.rows.iter().zip(&oracle).enumerate() {
        assert!((row.mean[0] - m).abs() <= 1e-9 * m.abs().max(1e-12), "step {}", t);
        assert!((row.var[0] - v).abs() <= 1e-9 * v, "step {}", t);
        mse += (m - data.truth[t][0]).powi(2);
    }
    let mse = mse / 500.0;
    assert!((out.loss.unwrap() - mse).abs() <= 1e-9 * mse);
}

#[test]
fn every_benchmark_runs_under_every_engine() {
    for b in Benchmark::all() {
        for kind in EngineKind::all() {
            let spec = build_benchmark(b, Params::default());
            let cfg = EngineConfig { kind, particles: Some(20), ess_resampling: false, seed: 1 };
            let out = run_benchmark(&spec, cfg, 15).unwrap_or_else(|e| panic!("{} {}: {}", b, kind, e));
            assert_eq!(out.rows.len(), 15);
            assert!(out.loss.unwrap().is_finite(), "{} {}", b, kind);
        }
    }
}

#[test]
fn benchmark_names_round_trip() {
    for b in Benchmark::all() {
        assert_eq!(b.name().parse::<Benchmark>().unwrap(), b);
    }
    assert!("mtt".parse::<Benchmark>().is_err());
}

#[test]
fn params_round_trip_through_text() {
    let p = Params { data_seed: 9, coin_bias: Some(0.25), dt: 0.05, cells: 7, ..Params::default() };
    assert_eq!(Params::parse(&p.to_kv()).unwrap(), p);
    assert_eq!(Params::parse("").unwrap(), Params::default());
    assert!(Params::parse("cells=0").is_err());
    assert!(Params::parse("speed=3").is_err());
    assert!(Params::parse("dt").is_err());
}

fn scalar(x: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, x)
}

#[test]
fn lqr_of_the_scalar_unit_system_is_the_golden_ratio() {
    let g = lqr_gain(&scalar(1.0), &scalar(1.0), &scalar(1.0), &scalar(1.0)).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((g.p[(0, 0)] - phi).abs() < 1e-9);
    assert!((g.k[(0, 0)] - 1.0 / phi).abs() < 1e-9);
}

#[test]
fn lqr_without_dynamics_does_nothing() {
    let a = DMatrix::zeros(2, 2);
    let b = DMatrix::from_column_slice(2, 1, &[1.0, 0.5]);
    let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
    let g = lqr_gain(&a, &b, &q, &scalar(1.0)).unwrap();
    assert!((&g.p - &q).norm() < 1e-12);
    assert!(g.k.norm() < 1e-12);
}

#[test]
fn lqr_stabilizes_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let a = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let open = a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let a = a * (rng.random_range(0.3..0.99) / open);
        let b = DMatrix::from_fn(3, 1, |_, _| rng.random_range(-1.0..1.0));
        let g = lqr_gain(&a, &b, &DMatrix::identity(3, 3), &scalar(1.0)).unwrap();
        let closed = &a - &b * &g.k;
        let radius = closed.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(radius < 1.0, "{}", radius);
        // The fixed point satisfies the Riccati equation.
        let (p, q, r) = (&g.p, DMatrix::identity(3, 3), scalar(1.0));
        let s = (&r + b.transpose() * p * &b).try_inverse().unwrap();
        let rhs = q + a.transpose() * p * &a - a.transpose() * p * &b * s * b.transpose() * p * &a;
        assert!((p - rhs).norm() < 1e-8);
    }
}

#[test]
fn robot_loop_keeps_the_robot_near_the_origin() {
    let spec = build_benchmark(Benchmark::Robot, Params::default());
    let out = run_benchmark(&spec, sds(0, 10), 100).unwrap();
    // Starting at 5 with no control the cost alone would be at least 2500.
    assert!(out.loss.unwrap() < 2500.0, "{}", out.loss.unwrap());
    let globals: HashMap<_, _> = spec.globals;
    assert!(globals.contains_key(&rppl::Name::new("a")));
    let x0 = DVector::from_column_slice(&[5.0, 0.0, 0.0]);
    assert_eq!(globals[&rppl::Name::new("xo")].as_vector().unwrap(), &x0);
}
