//! One PASS or FAIL line per acceptance criterion. Every criterion runs even
//! when an earlier one fails; the process exits with 1 if any of them does.

#[allow(dead_code)]
#[path = "../../core/tests/common/corpus.rs"]
mod corpus;
#[allow(dead_code)]
#[path = "../../core/tests/common/discrete.rs"]
mod discrete;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rppl::bench::{generate, kalman_oracle, models, run_node, summarize, Benchmark, Params};
use rppl::{load, Distribution, EngineConfig, EngineKind, Name, Value};
use rppl_cli::{run, sweep, RunConfig, SweepRow};

type Outcome = Result<String, String>;

/// Largest live node count allowed for a bounded-memory run.
const LIVE_BOUND: i64 = 8;

fn kalman(kind: EngineKind, particles: usize) -> RunConfig {
    RunConfig::benchmark(Benchmark::Kalman1d, kind, particles, 0)
}

fn medians(configs: Vec<RunConfig>, seeds: std::ops::Range<u64>) -> Result<Vec<f64>, String> {
    let jobs: Vec<_> = configs.into_iter().map(|c| (c, seeds.clone())).collect();
    let rows: Vec<SweepRow> = sweep(&jobs).map_err(|e| e.to_string())?;
    rows.iter()
        .map(|r| match (r.failed, r.median) {
            (0, Some(m)) => Ok(m),
            _ => Err(format!("{} of {} runs failed", r.failed, r.runs)),
        })
        .collect()
}

fn beta_bernoulli_exactness() -> Outcome {
    let mut cfg = RunConfig::benchmark(Benchmark::BetaBernoulli, EngineKind::Sds, 1, 0);
    cfg.params.coin_bias = Some(1.0);
    cfg.steps = Some(100);
    let out = run(&cfg).map_err(|e| e.to_string())?;
    for (i, row) in out.rows.iter().enumerate() {
        let t = i as f64 + 1.0;
        let (a, b) = (1.0 + t, 1.0);
        let mean = a / (a + b);
        let var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
        if (row.mean[0] - mean).abs() > 1e-12 || (row.var[0] - var).abs() > 1e-12 {
            return Err(format!("step {}: mean {} var {}, expected Beta({}, 1)", i, row.mean[0], row.var[0], a));
        }
    }
    Ok(format!("means {:.6}, {:.6}, {:.6}, ...", out.rows[0].mean[0], out.rows[1].mean[0], out.rows[2].mean[0]))
}

fn kalman_exactness() -> Outcome {
    let mut cfg = kalman(EngineKind::Sds, 1);
    cfg.steps = Some(500);
    cfg.seed = 7;
    let out = run(&cfg).map_err(|e| e.to_string())?;
    let data = generate(Benchmark::Kalman1d, &Params::default(), 500).map_err(|e| e.to_string())?;
    let obs: Vec<Option<f64>> = data.inputs.iter().map(|v| v.as_f64().ok()).collect();
    let oracle = kalman_oracle(0.0, 2500.0, 1.0, 1.0, &obs);
    let mut worst = 0.0f64;
    for (row, (m, v)) in out.rows.iter().zip(&oracle) {
        let rel_m = (row.mean[0] - m).abs() / m.abs();
        let rel_v = (row.var[0] - v).abs() / v;
        worst = worst.max(rel_m).max(rel_v);
    }
    if out.rows.len() != 500 || !(worst <= 1e-9) {
        return Err(format!("{} rows, worst relative error {:e}", out.rows.len(), worst));
    }
    Ok(format!("500 steps, worst relative error {:e}", worst))
}

fn accuracy_ordering() -> Outcome {
    let m = medians(vec![kalman(EngineKind::Sds, 100), kalman(EngineKind::Bds, 100), kalman(EngineKind::Pf, 100)], 0..50)?;
    let (sds, bds, pf) = (m[0], m[1], m[2]);
    let detail = format!("median MSE sds {:.4}, bds {:.4}, pf {:.4}", sds, bds, pf);
    if sds <= bds && bds <= 1.05 * pf && sds < pf {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pf_convergence() -> Outcome {
    let m = medians(vec![kalman(EngineKind::Pf, 10), kalman(EngineKind::Pf, 100), kalman(EngineKind::Pf, 1000)], 0..50)?;
    let detail = format!("median MSE at 10, 100, 1000 particles: {:.4}, {:.4}, {:.4}", m[0], m[1], m[2]);
    if m[1] <= 1.05 * m[0] && m[2] <= 1.05 * m[1] {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn live_counts(kind: EngineKind, steps: usize) -> Result<Vec<i64>, String> {
    let mut cfg = kalman(kind, 1);
    cfg.steps = Some(steps);
    cfg.mem_stats = true;
    Ok(run(&cfg).map_err(|e| e.to_string())?.rows.iter().map(|r| r.live_nodes).collect())
}

/// First step, counted from one, whose live count falls below 0.9 t.
fn first_below_linear(counts: &[i64]) -> Option<usize> {
    counts.iter().enumerate().map(|(i, &n)| (i + 1, n)).find(|&(t, n)| (n as f64) < 0.9 * t as f64).map(|(t, _)| t)
}

fn memory_boundedness() -> Outcome {
    let sds = live_counts(EngineKind::Sds, 5000)?;
    let max = sds.iter().copied().max().unwrap_or(0);
    let ds = live_counts(EngineKind::Ds, 5000)?;
    let detail = format!("sds max live nodes {}, ds live nodes at step 5000: {}", max, ds[4999]);
    match first_below_linear(&ds) {
        Some(t) => Err(format!("{}; ds below 0.9 t at step {}", detail, t)),
        None if max <= LIVE_BOUND => Ok(detail),
        None => Err(detail),
    }
}

fn model_live_counts(src: &str, steps: usize) -> Result<Vec<i64>, String> {
    let cfg = EngineConfig { kind: EngineKind::Sds, particles: Some(1), ess_resampling: false, seed: 0 };
    let rt = load(src, HashMap::new(), cfg).map_err(|e| e.to_string())?;
    let inputs: Vec<Value> = (0..steps).map(|t| Value::Float((t as f64 * 0.1).sin())).collect();
    let rows = run_node(&rt, Name::new("main"), &inputs, |_, out| {
        let (m, v) = summarize(out)?;
        Ok((m, v, None))
    })
    .map_err(|e| e.to_string())?;
    Ok(rows.iter().map(|r| r.live_nodes).collect())
}

fn unbounded_chains() -> Outcome {
    let p1 = model_live_counts(models::P1, 2000)?;
    let p2 = model_live_counts(models::P2, 2000)?;
    let p2_eval = model_live_counts(models::P2_EVAL, 2000)?;
    let max_eval = p2_eval.iter().copied().max().unwrap_or(0);
    let detail = format!(
        "live nodes after 2000 steps: p1 {}, p2 {}; p2 with eval peaks at {}",
        p1[1999], p2[1999], max_eval
    );
    for (name, counts) in [("p1", &p1), ("p2", &p2)] {
        if let Some(t) = first_below_linear(counts) {
            return Err(format!("{}; {} below 0.9 t at step {}", detail, name, t));
        }
    }
    if max_eval <= LIVE_BOUND {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn semantics_preservation() -> Outcome {
    if corpus::CORPUS.len() < 10 {
        return Err(format!("only {} programs", corpus::CORPUS.len()));
    }
    for (i, case) in corpus::CORPUS.iter().enumerate() {
        for seed in 0..3 {
            let inputs = corpus::stream(case.input, 100, 1000 * i as u64 + seed);
            let (reference, compiled) = corpus::both(case.src, case.node, &inputs);
            if corpus::keys(&reference) != corpus::keys(&compiled) {
                return Err(format!("{} differs on seed {}", case.name, seed));
            }
        }
    }
    let xs = [1.0, 2.0, 1.0, 0.0, -1.0, -1.0, 1.0];
    let inputs: Vec<Value> = xs.iter().map(|&d| Value::pair(Value::Float(0.0), Value::Float(d))).collect();
    let (a, b) = corpus::both(corpus::INTEGR, "integr", &inputs);
    for (t, e) in [0.0, 0.2, 0.3, 0.3, 0.2, 0.1, 0.2].iter().enumerate() {
        for out in [&a, &b] {
            let v = out[t].as_f64().map_err(|e| e.to_string())?;
            if (v - e).abs() > 1e-12 {
                return Err(format!("integr step {}: {} vs {}", t, v, e));
            }
        }
    }
    let bs = [true, true, false, true, false, false, true];
    let inputs: Vec<Value> = bs.iter().map(|&b| Value::Bool(b)).collect();
    let (a, b) = corpus::both(corpus::PRESENT_VS_IF, "present_vs_if", &inputs);
    let want = [(0, 0), (1, 1), (0, 0), (2, 3), (0, 0), (0, 0), (3, 6)];
    for out in [&a, &b] {
        let got: Vec<(i64, i64)> = out
            .iter()
            .map(|v| {
                let xs = v.items().unwrap();
                (xs[0].as_int().unwrap(), xs[1].as_int().unwrap())
            })
            .collect();
        if got != want {
            return Err(format!("present_vs_if gives {:?}", got));
        }
    }
    Ok(format!("{} programs, 3 streams of 100 steps each, both timelines", corpus::CORPUS.len()))
}

fn discrete_oracle() -> Outcome {
    use discrete::{against_enumeration, bools, BIASED_COIN, DIE, HMM, PAIR};
    let cases: [(&str, &str, Vec<Value>); 4] = [
        ("biased coin", BIASED_COIN, bools(&[true, true, false])),
        ("hmm", HMM, bools(&[true, false, false])),
        ("die", DIE, vec![Value::Int(2), Value::Int(3), Value::Int(1)]),
        ("pair", PAIR, bools(&[true, false])),
    ];
    for (name, src, inputs) in &cases {
        against_enumeration(src, inputs, EngineKind::Pf, 10_000).map_err(|e| format!("{}: {}", name, e))?;
    }
    let coin = "
let proba coin (y) = p where
  rec init p = sample (beta (1., 1.))
  and () = observe (bernoulli p, y)
let node main (y) = infer coin (y)
";
    let ys = [true, false, false];
    let out = discrete::outputs(coin, discrete::config(EngineKind::Sds, 1, 0), &bools(&ys));
    let expected = [Distribution::Beta(2.0, 1.0), Distribution::Beta(2.0, 2.0), Distribution::Beta(2.0, 3.0)];
    for (t, (v, e)) in out.iter().zip(&expected).enumerate() {
        let d = v.as_dist().map_err(|e| e.to_string())?;
        if d != e {
            return Err(format!("sds coin step {}: {:?}", t, d));
        }
    }
    Ok(format!("pf within 4 standard errors on {} models, sds exact on the coin", cases.len()))
}

fn bds_characterization() -> Outcome {
    let coin = |k| RunConfig::benchmark(Benchmark::BetaBernoulli, k, 100, 0);
    let m = medians(vec![coin(EngineKind::Bds), coin(EngineKind::Pf)], 0..50)?;
    let gap = (m[0] - m[1]).abs() / m[1];
    let outlier = |k| RunConfig::benchmark(Benchmark::Outlier, k, 100, 0);
    let o = medians(vec![outlier(EngineKind::Bds), outlier(EngineKind::Pf)], 0..50)?;
    let detail = format!(
        "coin median bds {:.3e} pf {:.3e} (gap {:.1}%); outlier median bds {:.4} pf {:.4}",
        m[0],
        m[1],
        100.0 * gap,
        o[0],
        o[1]
    );
    if gap < 0.2 && o[0] <= o[1] {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cli_output(args: &[&str], threads: usize) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rppl"))
        .args(args)
        .args(["--threads", &threads.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{:?}: {}", args, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn reproducibility() -> Outcome {
    let runs: [&[&str]; 6] = [
        &["--benchmark", "kalman-1d", "--inference", "pf", "--particles", "200", "--seed", "3"],
        &["--benchmark", "outlier", "--inference", "sds", "--particles", "50", "--seed", "1", "--mem-stats"],
        &["--benchmark", "robot", "--inference", "bds", "--particles", "30", "--seed", "2"],
        &["--benchmark", "slam", "--inference", "ds", "--particles", "20", "--steps", "50", "--seed", "4"],
        &["--benchmark", "gaussian-gaussian", "--inference", "is", "--particles", "100", "--ess-resampling"],
        &["--benchmark", "beta-bernoulli", "--inference", "pf", "--particles", "20", "--seeds", "0..16"],
    ];
    for args in runs {
        let one = cli_output(args, 1)?;
        let again = cli_output(args, 1)?;
        let eight = cli_output(args, 8)?;
        if one != again || one != eight {
            return Err(format!("{} differs", args.join(" ")));
        }
    }
    Ok(format!("{} configurations byte-identical with 1 and 8 threads", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("beta-bernoulli exactness", beta_bernoulli_exactness, Duration::from_secs(1)),
        ("kalman exactness", kalman_exactness, Duration::from_secs(2)),
        ("accuracy ordering", accuracy_ordering, Duration::from_secs(120)),
        ("pf convergence", pf_convergence, Duration::from_secs(300)),
        ("memory boundedness", memory_boundedness, Duration::from_secs(10)),
        ("unbounded chains", unbounded_chains, Duration::from_secs(10)),
        ("semantics preservation", semantics_preservation, Duration::from_secs(5)),
        ("discrete oracle", discrete_oracle, Duration::from_secs(60)),
        ("bds characterization", bds_characterization, Duration::from_secs(300)),
        ("reproducibility", reproducibility, Duration::from_secs(30)),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > *budget => Err(format!("{}; took {:.2?}, over {:?}", d, elapsed, budget)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {} ({}; {:.2?})", i + 1, name, detail, elapsed),
            Err(detail) => {
                println!("criterion {}: FAIL {} ({}; {:.2?})", i + 1, name, detail, elapsed);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {:?}", failed);
        std::process::exit(1);
    }
}
