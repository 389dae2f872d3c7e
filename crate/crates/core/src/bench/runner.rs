//! Steps the `main` node of a program and records one row per step.

use std::collections::HashMap;
use std::time::Instant;

use nalgebra::DMatrix;

use crate::bench::data::{self, Data};
use crate::bench::metrics::{lqr_cost, squared_error};
use crate::bench::{Benchmark, BenchmarkSpec, Metric};
use crate::error::{Error, Result};
use crate::infer::EngineConfig;
use crate::muf::{step_node, Deterministic, Runtime};
use crate::names::Name;
use crate::value::Value;

#[derive(Clone, Debug, PartialEq)]
pub struct StepRow {
    pub step: usize,
    pub loss: Option<f64>,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    /// Increment of the log marginal likelihood at this step.
    pub log_evidence: f64,
    pub live_nodes: i64,
    pub latency_ns: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<StepRow>,
    /// Aggregate loss of the run, for benchmarks.
    pub loss: Option<f64>,
    /// Steps where a delayed engine had to sample a result it could not
    /// describe in closed form.
    pub fallbacks: u64,
}

fn flatten(v: &Value, diagonal: bool, out: &mut Vec<f64>) -> Result<()> {
    match v {
        Value::Float(x) => out.push(*x),
        Value::Int(n) => out.push(*n as f64),
        Value::Bool(b) => out.push(if *b { 1.0 } else { 0.0 }),
        Value::Unit | Value::Nil => {}
        Value::Vector(x) => out.extend(x.iter()),
        Value::Matrix(m) if diagonal => out.extend(m.diagonal().iter()),
        Value::Matrix(m) => out.extend(m.iter()),
        Value::Tuple(xs) => {
            for x in xs.iter() {
                flatten(x, diagonal, out)?;
            }
        }
        other => return Err(Error::Eval(format!("cannot summarize a {}", other.type_name()))),
    }
    Ok(())
}

/// Mean and variance of every numeric component of an output. Plain values
/// have zero variance; covariance matrices contribute their diagonal.
pub fn summarize(v: &Value) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut mean, mut var) = (Vec::new(), Vec::new());
    match v {
        Value::Dist(d) => {
            flatten(&d.mean()?, false, &mut mean)?;
            flatten(&d.variance()?, true, &mut var)?;
        }
        Value::Tuple(xs) => {
            for x in xs.iter() {
                let (m, s) = summarize(x)?;
                mean.extend(m);
                var.extend(s);
            }
        }
        other => {
            flatten(other, false, &mut mean)?;
            var = vec![0.0; mean.len()];
        }
    }
    Ok((mean, var))
}

/// Runs `node` on the inputs. `score` turns each output into the row's
/// summary and loss.
pub fn run_node<F>(rt: &Runtime, node: Name, inputs: &[Value], mut score: F) -> Result<Vec<StepRow>>
where
    F: FnMut(usize, &Value) -> Result<(Vec<f64>, Vec<f64>, Option<f64>)>,
{
    let mut state = match rt.program.defs.get(&node) {
        Some(d) => d.init.clone(),
        None => return Err(Error::Config(format!("the program has no node `{}`", node))),
    };
    let mut rows = Vec::with_capacity(inputs.len());
    for (t, x) in inputs.iter().enumerate() {
        let before = rt.stats.lock().unwrap_or_else(|e| e.into_inner()).log_evidence;
        let start = Instant::now();
        let (out, next) = step_node(rt, node, state, x.clone(), &mut Deterministic)?;
        let latency_ns = start.elapsed().as_nanos() as u64;
        state = next;
        let after = rt.stats.lock().unwrap_or_else(|e| e.into_inner()).log_evidence;
        let (mean, var, loss) = score(t, &out)?;
        rows.push(StepRow {
            step: t,
            loss,
            mean,
            var,
            log_evidence: after - before,
            live_nodes: rt.live_node_count(),
            latency_ns,
        });
    }
    Ok(rows)
}

fn fallbacks(rt: &Runtime) -> u64 {
    rt.stats.lock().unwrap_or_else(|e| e.into_inner()).fallbacks
}

/// Runs the `main` node of a program for `steps` steps on unit inputs.
pub fn run_source(src: &str, config: EngineConfig, steps: usize) -> Result<RunOutput> {
    let rt = crate::load(src, HashMap::new(), config)?;
    let inputs = vec![Value::Unit; steps];
    let rows = run_node(&rt, Name::new("main"), &inputs, |_, out| {
        let (m, v) = summarize(out)?;
        Ok((m, v, None))
    })?;
    Ok(RunOutput { rows, loss: None, fallbacks: fallbacks(&rt) })
}

fn as_dist_summary(v: &Value) -> Result<(Vec<f64>, Vec<f64>)> {
    match v {
        Value::Dist(_) => summarize(v),
        other => Err(Error::Eval(format!("expected a distribution, got a {}", other.type_name()))),
    }
}

/// Runs a benchmark for `steps` steps on its seeded data.
pub fn run_benchmark(spec: &BenchmarkSpec, config: EngineConfig, steps: usize) -> Result<RunOutput> {
    let rt = crate::load(spec.source, spec.globals.clone(), config)?;
    let Data { inputs, truth } = data::generate(spec.benchmark, &spec.params, steps)?;
    let cells = spec.params.cells;
    let (q, r) = (DMatrix::identity(3, 3), DMatrix::identity(1, 1));
    let rows = run_node(&rt, Name::new("main"), &inputs, |t, out| match spec.benchmark {
        Benchmark::BetaBernoulli | Benchmark::Kalman1d => {
            let (m, v) = as_dist_summary(out)?;
            let loss = squared_error(&m, &truth[t])?;
            Ok((m, v, Some(loss)))
        }
        Benchmark::GaussianGaussian => {
            // Errors on the mean and on the variance parameter add up.
            let (m, v) = as_dist_summary(out)?;
            let loss = 2.0 * squared_error(&m, &truth[t])?;
            Ok((m, v, Some(loss)))
        }
        Benchmark::Outlier => {
            let (m, v) = as_dist_summary(out)?;
            let loss = squared_error(&m[1..], &truth[t][1..])?;
            Ok((m, v, Some(loss)))
        }
        Benchmark::Robot => {
            let xs = out.items()?;
            let (m, v) = as_dist_summary(&xs[0])?;
            let loss = lqr_cost(xs[1].as_vector()?, xs[2].as_vector()?, &q, &r);
            Ok((m, v, Some(loss)))
        }
        Benchmark::Slam => {
            let xs = out.items()?;
            let (m, v) = as_dist_summary(&xs[0])?;
            let map = inputs[t].items()?[0].items()?;
            let mut truth = Vec::with_capacity(cells + 1);
            for c in map {
                truth.push(if c.as_bool()? { 1.0 } else { 0.0 });
            }
            truth.push(xs[1].as_int()? as f64);
            let loss = squared_error(&m, &truth)?;
            Ok((m, v, Some(loss)))
        }
    })?;
    let losses: Vec<f64> = rows.iter().filter_map(|r| r.loss).collect();
    let total: f64 = losses.iter().sum();
    let loss = match spec.metric {
        Metric::Mse => total / losses.len().max(1) as f64,
        Metric::LqrLoss => total,
    };
    Ok(RunOutput { rows, loss: Some(loss), fallbacks: fallbacks(&rt) })
}
