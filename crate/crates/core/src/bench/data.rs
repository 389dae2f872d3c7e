//! Input streams sampled from the benchmark models with a fixed data seed.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bench::{Benchmark, Params, RobotSystem};
use crate::dist::{self, Distribution};
use crate::error::Result;
use crate::value::Value;

/// Per-step inputs of `main`, and the hidden values to estimate. Closed-loop
/// benchmarks report their truth from `main` and leave `truth` empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Data {
    pub inputs: Vec<Value>,
    pub truth: Vec<Vec<f64>>,
}

fn draw_f64(d: &Distribution, rng: &mut ChaCha8Rng) -> f64 {
    d.draw(rng).as_f64().expect("scalar distribution")
}

fn draw_bool(p: f64, rng: &mut ChaCha8Rng) -> Result<bool> {
    dist::bernoulli(p)?.draw(rng).as_bool()
}

/// The data of `steps` steps of a benchmark.
pub fn generate(benchmark: Benchmark, params: &Params, steps: usize) -> Result<Data> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.data_seed);
    let mut inputs = Vec::with_capacity(steps);
    let mut truth = Vec::with_capacity(steps);
    match benchmark {
        Benchmark::BetaBernoulli => {
            let p = match params.coin_bias {
                Some(p) => p,
                None => draw_f64(&dist::beta(1.0, 1.0)?, &mut rng),
            };
            for _ in 0..steps {
                inputs.push(Value::Bool(draw_bool(p, &mut rng)?));
                truth.push(vec![p]);
            }
        }
        Benchmark::GaussianGaussian => {
            let mu = draw_f64(&dist::gaussian(0.0, 10.0)?, &mut rng);
            let s = draw_f64(&dist::gaussian(0.0, 1.0)?, &mut rng);
            let sigma = s * s;
            let obs = dist::gaussian(mu, sigma)?;
            for _ in 0..steps {
                inputs.push(Value::Float(draw_f64(&obs, &mut rng)));
                truth.push(vec![mu, sigma]);
            }
        }
        Benchmark::Kalman1d => {
            let mut x = draw_f64(&dist::gaussian(0.0, 2500.0)?, &mut rng);
            for t in 0..steps {
                if t > 0 {
                    x = draw_f64(&dist::gaussian(x, 1.0)?, &mut rng);
                }
                inputs.push(Value::Float(draw_f64(&dist::gaussian(x, 1.0)?, &mut rng)));
                truth.push(vec![x]);
            }
        }
        Benchmark::Outlier => {
            let prob = draw_f64(&dist::beta(100.0, 1000.0)?, &mut rng);
            let mut x = draw_f64(&dist::gaussian(0.0, 2500.0)?, &mut rng);
            for t in 0..steps {
                if t > 0 {
                    x = draw_f64(&dist::gaussian(x, 1.0)?, &mut rng);
                }
                let outlier = draw_bool(prob, &mut rng)?;
                let y = if outlier {
                    draw_f64(&dist::gaussian(0.0, 10000.0)?, &mut rng)
                } else {
                    draw_f64(&dist::gaussian(x, 1.0)?, &mut rng)
                };
                inputs.push(Value::Float(y));
                truth.push(vec![if outlier { 1.0 } else { 0.0 }, x]);
            }
        }
        Benchmark::Robot => {
            let sys = RobotSystem::new(params);
            let w = dist::mv_gaussian(DVector::zeros(3), sys.noise)?;
            let acc = dist::gaussian(0.0, 1.0)?;
            let gps = dist::gaussian(0.0, 0.01)?;
            for t in 0..steps {
                inputs.push(Value::tuple(vec![
                    w.draw(&mut rng),
                    Value::Float(draw_f64(&acc, &mut rng)),
                    Value::Bool((t + 1) % params.gps_period == 0),
                    Value::Float(draw_f64(&gps, &mut rng)),
                ]));
            }
        }
        Benchmark::Slam => {
            let mut map = Vec::with_capacity(params.cells);
            for _ in 0..params.cells {
                map.push(Value::Bool(draw_bool(0.5, &mut rng)?));
            }
            let map = Value::tuple(map);
            for _ in 0..steps {
                let slip = draw_bool(0.1, &mut rng)?;
                let flip = draw_bool(params.sensor_noise, &mut rng)?;
                inputs.push(Value::tuple(vec![map.clone(), Value::Bool(slip), Value::Bool(flip)]));
            }
        }
    }
    Ok(Data { inputs, truth })
}
