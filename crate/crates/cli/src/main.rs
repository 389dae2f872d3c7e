use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};
use rppl::bench::{Benchmark, Params};
use rppl::EngineKind;
use rppl_cli::{parse_seeds, run, sweep, sweep_csv, to_csv, CliError, Mode, RunConfig};

/// Runs a program or a benchmark under an inference engine and prints one
/// CSV row per step.
#[derive(Parser, Debug)]
#[command(name = "rppl", version)]
#[command(group(ArgGroup::new("model").required(true).args(["benchmark", "source"])))]
struct Args {
    /// beta-bernoulli, gaussian-gaussian, kalman-1d, outlier, robot or slam
    #[arg(long)]
    benchmark: Option<Benchmark>,
    /// Program whose `main` node is stepped on unit inputs
    #[arg(long)]
    source: Option<PathBuf>,
    /// is, pf, ds, bds or sds
    #[arg(long, default_value = "pf")]
    inference: EngineKind,
    #[arg(long, default_value_t = 100)]
    particles: usize,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Half-open range S0..S1: run every seed and print loss quantiles
    #[arg(long)]
    seeds: Option<String>,
    /// Defaults to standard output
    #[arg(long)]
    output: Option<PathBuf>,
    /// Fill the live_nodes column
    #[arg(long)]
    mem_stats: bool,
    /// Resample only when the effective sample size drops below half
    #[arg(long)]
    ess_resampling: bool,
    /// Fill the latency_ns column (output is then no longer reproducible)
    #[arg(long)]
    latency: bool,
    /// Benchmark parameter, as key=value
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Worker threads for particles and sweeps
    #[arg(long)]
    threads: Option<usize>,
}

fn config(args: &Args) -> Result<RunConfig, CliError> {
    let mode = match (&args.benchmark, &args.source) {
        (Some(b), None) => Mode::Benchmark(*b),
        (None, Some(p)) => Mode::Source(p.clone()),
        _ => return Err(CliError::Usage("give exactly one of --benchmark and --source".into())),
    };
    let params = Params::parse(&args.params.join(","))?;
    let cfg = RunConfig {
        mode,
        inference: args.inference,
        particles: args.particles,
        steps: args.steps,
        seed: args.seed,
        output: args.output.clone(),
        mem_stats: args.mem_stats,
        ess_resampling: args.ess_resampling,
        latency: args.latency,
        params,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = config(args)?;
    let text = match &args.seeds {
        Some(s) => {
            let seeds = parse_seeds(s)?;
            sweep_csv(&sweep(&[(cfg.clone(), seeds)])?)
        }
        None => {
            let out = run(&cfg)?;
            if out.fallbacks > 0 {
                eprintln!("note: {} results had no closed form and were sampled", out.fallbacks);
            }
            to_csv(&out, &cfg)
        }
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|err| CliError::Write { path: path.clone(), err }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|err| CliError::Write { path: "<stdout>".into(), err })
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {}", e);
            return ExitCode::from(1);
        }
    }
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (CliError::Usage(_) | CliError::Model(rppl::Error::Config(_)))) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}
