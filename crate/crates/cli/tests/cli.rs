use std::path::PathBuf;
use std::process::{Command, Output};

use rppl::bench::{generate, kalman_oracle, Benchmark, Params};
use rppl::EngineKind;
use rppl_cli::{run, sweep, sweep_csv, CliError, RunConfig, CSV_HEADER, SWEEP_HEADER};

fn rppl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rppl")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("rppl-cli-{}-{}", std::process::id(), name))
}

#[test]
fn coin_means_under_sds() {
    let o = rppl(&[
        "--benchmark", "beta-bernoulli", "--inference", "sds", "--particles", "1", "--steps", "3", "--seed", "0",
        "--param", "coin_bias=1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let means: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    for (m, e) in means.iter().zip([2.0 / 3.0, 0.75, 0.8]) {
        assert!((m - e).abs() < 1e-12, "{} vs {}", m, e);
    }
}

#[test]
fn kalman_rows_match_the_oracle() {
    let o = rppl(&["--benchmark", "kalman-1d", "--inference", "sds", "--particles", "1", "--steps", "500", "--seed", "7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 500);
    let p = Params::default();
    let data = generate(Benchmark::Kalman1d, &p, 500).unwrap();
    let obs: Vec<Option<f64>> = data.inputs.iter().map(|v| Some(v.as_f64().unwrap())).collect();
    let oracle = kalman_oracle(0.0, 2500.0, 1.0, 1.0, &obs);
    for (t, (row, (m, _))) in rows.iter().zip(&oracle).enumerate() {
        assert_eq!(row[0], t.to_string());
        let loss: f64 = row[1].parse().unwrap();
        let expected = (m - data.truth[t][0]).powi(2);
        assert!((loss - expected).abs() <= 1e-9 * expected.max(1e-9), "step {}", t);
        assert_eq!(row[5], "");
        assert_eq!(row[6], "");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["--benchmark", "kalman-1d", "--inference", "magic"][..],
        &["--benchmark", "kalman-1d", "--particles", "0"],
        &["--benchmark", "nope"],
        &[],
        &["--benchmark", "kalman-1d", "--seeds", "4..2"],
        &["--benchmark", "kalman-1d", "--param", "speed=2"],
    ] {
        let o = rppl(args);
        assert_eq!(o.status.code(), Some(2), "{:?}", args);
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn program_errors_exit_nonzero_with_a_diagnostic() {
    let bad = [
        ("syntax", "let node main () = (1"),
        ("kind", "let node main () = sample (gaussian (0., 1.))"),
        ("cycle", "let node main () = x where rec x = x + 1"),
    ];
    for (name, src) in bad {
        let path = temp(name);
        std::fs::write(&path, src).unwrap();
        let o = rppl(&["--source", path.to_str().unwrap(), "--steps", "2"]);
        std::fs::remove_file(&path).ok();
        assert_eq!(o.status.code(), Some(1), "{}", name);
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"), "{}", name);
    }
    let o = rppl(&["--source", "/nonexistent/model.rppl"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn source_programs_run_on_unit_inputs() {
    let path = temp("counter");
    std::fs::write(&path, "let node main () = n where rec n = 0 -> pre n + 1").unwrap();
    let out = temp("counter.csv");
    let o = rppl(&["--source", path.to_str().unwrap(), "--steps", "4", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    std::fs::remove_file(&path).ok();
    std::fs::remove_file(&out).ok();
    let means: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(means.len(), 4);
    assert_eq!(means[3].parse::<f64>().unwrap(), 3.0);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("")));
}

#[test]
fn mem_stats_and_latency_fill_their_columns() {
    let o = rppl(&["--benchmark", "kalman-1d", "--inference", "ds", "--particles", "1", "--steps", "5", "--mem-stats", "--latency"]);
    let text = stdout(&o);
    for (t, l) in text.lines().skip(1).enumerate() {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols[5].parse::<i64>().unwrap(), 2 * (t as i64 + 1));
        assert!(cols[6].parse::<u64>().is_ok());
    }
}

#[test]
fn one_seed_sweep_is_the_single_run() {
    let cfg = RunConfig::benchmark(Benchmark::Outlier, EngineKind::Pf, 20, 3);
    let cfg = RunConfig { steps: Some(50), ..cfg };
    let single = run(&cfg).unwrap().loss.unwrap();
    let rows = sweep(&[(cfg, 3..4)]).unwrap();
    assert_eq!(rows[0].runs, 1);
    assert_eq!(rows[0].failed, 0);
    for q in [rows[0].median, rows[0].p10, rows[0].p90] {
        assert_eq!(q, Some(single));
    }
    let text = sweep_csv(&rows);
    assert!(text.starts_with(SWEEP_HEADER));
    assert!(text.lines().nth(1).unwrap().starts_with("outlier,pf,20,50,3..4,1,0,"));
}

#[test]
fn failed_runs_are_counted() {
    let path = temp("degenerate");
    std::fs::write(&path, "let proba m () = 0. where rec () = factor (log 0.)\nlet node main () = infer m ()").unwrap();
    let cfg = RunConfig {
        mode: rppl_cli::Mode::Source(path.clone()),
        steps: Some(2),
        ..RunConfig::benchmark(Benchmark::Kalman1d, EngineKind::Pf, 5, 0)
    };
    assert!(matches!(run(&cfg), Err(CliError::Model(_))));
    let rows = sweep(&[(cfg, 0..3)]).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!((rows[0].runs, rows[0].failed, rows[0].median), (3, 3, None));
    assert!(sweep(&[]).is_err());
}

#[test]
fn seed_sweep_through_the_binary() {
    let o = rppl(&["--benchmark", "beta-bernoulli", "--particles", "10", "--steps", "20", "--seeds", "0..5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..7], &["beta-bernoulli", "pf", "10", "20", "0..5", "5", "0"]);
    let (median, p10, p90): (f64, f64, f64) = (row[7].parse().unwrap(), row[8].parse().unwrap(), row[9].parse().unwrap());
    assert!(p10 <= median && median <= p90);
}
