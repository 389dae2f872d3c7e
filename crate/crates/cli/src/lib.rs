//! Runs programs and benchmarks, and writes their per-step results as CSV.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::PathBuf;

use rayon::prelude::*;
use rppl::bench::{self, Benchmark, Params, RunOutput};
use rppl::{EngineConfig, EngineKind};
use thiserror::Error;

pub const CSV_HEADER: &str = "step,loss,mean,var,log_evidence,live_nodes,latency_ns";
pub const SWEEP_HEADER: &str = "benchmark,inference,particles,steps,seeds,runs,failed,median,p10,p90";

/// Steps run on a source program when none are requested.
pub const DEFAULT_SOURCE_STEPS: usize = 100;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read `{path}`: {err}")]
    Read { path: PathBuf, err: std::io::Error },
    #[error("cannot write `{path}`: {err}")]
    Write { path: PathBuf, err: std::io::Error },
    #[error(transparent)]
    Model(#[from] rppl::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    Source(PathBuf),
    Benchmark(Benchmark),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub inference: EngineKind,
    pub particles: usize,
    /// Defaults to the benchmark's own length.
    pub steps: Option<usize>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub mem_stats: bool,
    pub ess_resampling: bool,
    /// Record step latencies. Off by default so that output is reproducible.
    pub latency: bool,
    pub params: Params,
}

impl RunConfig {
    pub fn benchmark(b: Benchmark, inference: EngineKind, particles: usize, seed: u64) -> RunConfig {
        RunConfig {
            mode: Mode::Benchmark(b),
            inference,
            particles,
            steps: None,
            seed,
            output: None,
            mem_stats: false,
            ess_resampling: false,
            latency: false,
            params: Params::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.particles == 0 {
            return Err(CliError::Usage("--particles must be at least 1".into()));
        }
        if self.steps == Some(0) {
            return Err(CliError::Usage("--steps must be at least 1".into()));
        }
        Ok(())
    }

    fn engine(&self) -> EngineConfig {
        EngineConfig {
            kind: self.inference,
            particles: Some(self.particles),
            ess_resampling: self.ess_resampling,
            seed: self.seed,
        }
    }

    fn label(&self) -> String {
        match &self.mode {
            Mode::Benchmark(b) => b.name().to_string(),
            Mode::Source(p) => p.display().to_string(),
        }
    }
}

/// Runs one configuration to completion.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    match &cfg.mode {
        Mode::Source(path) => {
            let src = std::fs::read_to_string(path).map_err(|err| CliError::Read { path: path.clone(), err })?;
            let steps = cfg.steps.unwrap_or(DEFAULT_SOURCE_STEPS);
            Ok(bench::run_source(&src, cfg.engine(), steps)?)
        }
        Mode::Benchmark(b) => {
            let spec = bench::build_benchmark(*b, cfg.params.clone());
            let steps = cfg.steps.unwrap_or(spec.default_steps);
            Ok(bench::run_benchmark(&spec, cfg.engine(), steps)?)
        }
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{:.16e}", x)).collect::<Vec<_>>().join(";")
}

/// One line per step under [`CSV_HEADER`]. Floats carry 17 significant digits.
pub fn to_csv(out: &RunOutput, cfg: &RunConfig) -> String {
    let mut s = String::with_capacity(64 * (out.rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &out.rows {
        let loss = r.loss.map(|l| format!("{:.16e}", l)).unwrap_or_default();
        let live = if cfg.mem_stats { r.live_nodes.to_string() } else { String::new() };
        let latency = if cfg.latency { r.latency_ns.to_string() } else { String::new() };
        let _ = writeln!(
            s,
            "{},{},{},{},{:.16e},{},{}",
            r.step,
            loss,
            join(&r.mean),
            join(&r.var),
            r.log_evidence,
            live,
            latency
        );
    }
    s
}

/// Parses `S0..S1`, the half-open range of seeds.
pub fn parse_seeds(s: &str) -> Result<Range<u64>, CliError> {
    let bad = || CliError::Usage(format!("expected a seed range S0..S1, got `{}`", s));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a >= b {
        return Err(bad());
    }
    Ok(a..b)
}

/// Nearest-rank quantile of sorted values: the smallest value with at least
/// a fraction `p` of the data at or below it.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of no data");
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub config: RunConfig,
    pub seeds: Range<u64>,
    pub runs: usize,
    pub failed: usize,
    /// Median, 10% and 90% quantiles of the losses of the successful runs.
    pub median: Option<f64>,
    pub p10: Option<f64>,
    pub p90: Option<f64>,
}

/// Loss of one run: the benchmark loss, or for a source program the mean
/// over steps of the first output component.
fn run_loss(cfg: &RunConfig) -> Result<f64, CliError> {
    let out = run(cfg)?;
    match out.loss {
        Some(l) => Ok(l),
        None => {
            let xs: Vec<f64> = out.rows.iter().filter_map(|r| r.mean.first().copied()).collect();
            Ok(xs.iter().sum::<f64>() / xs.len().max(1) as f64)
        }
    }
}

/// Runs every configuration over its seed range and aggregates the losses.
/// Runs proceed in parallel; results do not depend on scheduling.
pub fn sweep(configs: &[(RunConfig, Range<u64>)]) -> Result<Vec<SweepRow>, CliError> {
    if configs.is_empty() {
        return Err(CliError::Usage("a sweep needs at least one configuration".into()));
    }
    for (c, _) in configs {
        c.validate()?;
    }
    let jobs: Vec<(usize, RunConfig)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, (c, seeds))| seeds.clone().map(move |s| (i, RunConfig { seed: s, ..c.clone() })))
        .collect();
    let results: Vec<(usize, Option<f64>)> = jobs
        .into_par_iter()
        .map(|(i, c)| (i, run_loss(&c).ok().filter(|l| l.is_finite())))
        .collect();
    let mut rows = Vec::with_capacity(configs.len());
    for (i, (c, seeds)) in configs.iter().enumerate() {
        let mut losses: Vec<f64> = Vec::new();
        let mut runs = 0;
        for (j, l) in &results {
            if *j == i {
                runs += 1;
                losses.extend(l);
            }
        }
        losses.sort_by(f64::total_cmp);
        let q = |p| (!losses.is_empty()).then(|| quantile(&losses, p));
        rows.push(SweepRow {
            config: c.clone(),
            seeds: seeds.clone(),
            runs,
            failed: runs - losses.len(),
            median: q(0.5),
            p10: q(0.1),
            p90: q(0.9),
        });
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    let f = |x: Option<f64>| x.map(|x| format!("{:.16e}", x)).unwrap_or_default();
    for r in rows {
        let steps = r.config.steps.map(|n| n.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{}..{},{},{},{},{},{}",
            r.config.label(),
            r.config.inference,
            r.config.particles,
            steps,
            r.seeds.start,
            r.seeds.end,
            r.runs,
            r.failed,
            f(r.median),
            f(r.p10),
            f(r.p90)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_quantiles_of_one_to_hundred() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&xs, 0.1), 10.0);
        assert_eq!(quantile(&xs, 0.5), 50.0);
        assert_eq!(quantile(&xs, 0.9), 90.0);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 100.0);
    }

    #[test]
    fn single_value_is_every_quantile() {
        assert_eq!(quantile(&[3.5], 0.1), 3.5);
        assert_eq!(quantile(&[3.5], 0.9), 3.5);
    }

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seeds("0..50").unwrap(), 0..50);
        assert_eq!(parse_seeds("7..8").unwrap(), 7..8);
        assert!(parse_seeds("5..5").is_err());
        assert!(parse_seeds("3").is_err());
        assert!(parse_seeds("a..4").is_err());
    }

    #[test]
    fn zero_particles_is_a_usage_error() {
        let mut c = RunConfig::benchmark(Benchmark::Kalman1d, EngineKind::Pf, 0, 0);
        assert!(matches!(run(&c), Err(CliError::Usage(_))));
        c.particles = 1;
        c.steps = Some(0);
        assert!(matches!(run(&c), Err(CliError::Usage(_))));
    }
}
