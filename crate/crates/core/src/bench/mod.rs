//! The benchmark suite: model sources, seeded data, oracles, losses and a
//! step-by-step runner.

pub mod data;
pub mod lqr;
pub mod metrics;
pub mod models;
pub mod oracle;
pub mod runner;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::names::Name;
use crate::value::Value;

pub use data::{generate, Data};
pub use lqr::{lqr_gain, LqrGain};
pub use metrics::{lqr_loss, mse_loss, squared_error};
pub use oracle::kalman_oracle;
pub use runner::{run_benchmark, run_node, run_source, summarize, RunOutput, StepRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Benchmark {
    BetaBernoulli,
    GaussianGaussian,
    Kalman1d,
    Outlier,
    Robot,
    Slam,
}

impl Benchmark {
    pub fn all() -> [Benchmark; 6] {
        use Benchmark::*;
        [BetaBernoulli, GaussianGaussian, Kalman1d, Outlier, Robot, Slam]
    }

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::BetaBernoulli => "beta-bernoulli",
            Benchmark::GaussianGaussian => "gaussian-gaussian",
            Benchmark::Kalman1d => "kalman-1d",
            Benchmark::Outlier => "outlier",
            Benchmark::Robot => "robot",
            Benchmark::Slam => "slam",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Benchmark::BetaBernoulli => models::BETA_BERNOULLI,
            Benchmark::GaussianGaussian => models::GAUSSIAN_GAUSSIAN,
            Benchmark::Kalman1d => models::KALMAN_1D,
            Benchmark::Outlier => models::OUTLIER,
            Benchmark::Robot => models::ROBOT,
            Benchmark::Slam => models::SLAM,
        }
    }

    pub fn metric(self) -> Metric {
        match self {
            Benchmark::Robot => Metric::LqrLoss,
            _ => Metric::Mse,
        }
    }

    pub fn default_steps(self) -> usize {
        match self {
            Benchmark::Kalman1d | Benchmark::Outlier => 500,
            Benchmark::Slam => 200,
            _ => 100,
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Benchmark> {
        Benchmark::all()
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown benchmark `{}`", s)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Mean over steps of the squared error of the posterior mean.
    Mse,
    /// Sum over steps of the quadratic LQR cost of the true trajectory.
    LqrLoss,
}

/// Knobs of the benchmarks. The data stream depends only on these, never on
/// the inference seed.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub data_seed: u64,
    /// Bias of the coin; drawn from the prior when absent.
    pub coin_bias: Option<f64>,
    /// Robot time step.
    pub dt: f64,
    /// Robot process noise variance, per state component.
    pub process_noise: f64,
    /// The robot gets a GPS reading every `gps_period` steps.
    pub gps_period: usize,
    /// Initial robot position.
    pub start: f64,
    pub cells: usize,
    pub sensor_noise: f64,
}

impl Default for Params {
    fn default() -> Params {
        Params {
            data_seed: 2020,
            coin_bias: None,
            dt: 0.1,
            process_noise: 0.01,
            gps_period: 10,
            start: 5.0,
            cells: 11,
            sensor_noise: 0.1,
        }
    }
}

impl Params {
    /// Sets one knob from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("bad value `{}` for `{}`", v, key)))
        }
        match key {
            "data_seed" => self.data_seed = num(key, value)?,
            "coin_bias" => self.coin_bias = Some(num(key, value)?),
            "dt" => self.dt = num(key, value)?,
            "process_noise" => self.process_noise = num(key, value)?,
            "gps_period" => self.gps_period = num(key, value)?,
            "start" => self.start = num(key, value)?,
            "cells" => self.cells = num(key, value)?,
            "sensor_noise" => self.sensor_noise = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown benchmark parameter `{}`", key))),
        }
        if self.gps_period == 0 || self.cells == 0 {
            return Err(Error::Config(format!("`{}` must be positive", key)));
        }
        Ok(())
    }

    /// Parses `key=value` pairs, one per line or comma separated.
    pub fn parse(text: &str) -> Result<Params> {
        let mut p = Params::default();
        for item in text.split([',', '\n']).map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{}`", item)))?;
            p.set(k.trim(), v.trim())?;
        }
        Ok(p)
    }

    pub fn to_kv(&self) -> String {
        let mut m = BTreeMap::new();
        m.insert("data_seed", self.data_seed.to_string());
        if let Some(b) = self.coin_bias {
            m.insert("coin_bias", b.to_string());
        }
        m.insert("dt", self.dt.to_string());
        m.insert("process_noise", self.process_noise.to_string());
        m.insert("gps_period", self.gps_period.to_string());
        m.insert("start", self.start.to_string());
        m.insert("cells", self.cells.to_string());
        m.insert("sensor_noise", self.sensor_noise.to_string());
        m.iter().map(|(k, v)| format!("{}={}\n", k, v)).collect()
    }
}

/// Robot dynamics: position, velocity and acceleration, commanded through
/// the acceleration.
pub struct RobotSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub noise: DMatrix<f64>,
    pub xo: DVector<f64>,
    pub uo: DVector<f64>,
}

impl RobotSystem {
    pub fn new(p: &Params) -> RobotSystem {
        let dt = p.dt;
        RobotSystem {
            a: DMatrix::from_row_slice(3, 3, &[1.0, dt, 0.5 * dt * dt, 0.0, 1.0, dt, 0.0, 0.0, 1.0]),
            b: DMatrix::from_column_slice(3, 1, &[0.0, 0.0, dt]),
            noise: DMatrix::identity(3, 3) * p.process_noise,
            xo: DVector::from_column_slice(&[p.start, 0.0, 0.0]),
            uo: DVector::zeros(1),
        }
    }
}

/// Everything needed to run one benchmark.
pub struct BenchmarkSpec {
    pub benchmark: Benchmark,
    pub source: &'static str,
    pub globals: HashMap<Name, Value>,
    pub params: Params,
    pub metric: Metric,
    pub default_steps: usize,
}

pub fn build_benchmark(benchmark: Benchmark, params: Params) -> BenchmarkSpec {
    let mut globals = HashMap::new();
    match benchmark {
        Benchmark::Robot => {
            let sys = RobotSystem::new(&params);
            globals.insert(Name::new("a"), Value::matrix(sys.a));
            globals.insert(Name::new("b"), Value::matrix(sys.b));
            globals.insert(Name::new("noise"), Value::matrix(sys.noise));
            globals.insert(Name::new("xo"), Value::vector(sys.xo));
            globals.insert(Name::new("uo"), Value::vector(sys.uo));
        }
        Benchmark::Slam => {
            globals.insert(Name::new("max_pos"), Value::Int(params.cells as i64 - 1));
            globals.insert(Name::new("sensor_noise"), Value::Float(params.sensor_noise));
        }
        _ => {}
    }
    BenchmarkSpec {
        benchmark,
        source: benchmark.source(),
        globals,
        params,
        metric: benchmark.metric(),
        default_steps: benchmark.default_steps(),
    }
}
