//! Probability distributions: sampling, log-densities and moments.
//!
//! `Gaussian(mean, variance)`: the second parameter is the variance, as are
//! the covariance parameters of `MvGaussian`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Beta as BetaSampler, Distribution as _, Poisson as PoissonSampler, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{dist_err, Error, Result};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    Dirac(Value),
    Bernoulli(f64),
    Beta(f64, f64),
    Gaussian(f64, f64),
    MvGaussian(DVector<f64>, DMatrix<f64>),
    Poisson(f64),
    Categorical(Vec<(Value, f64)>),
    Mixture(Vec<(Distribution, f64)>),
    /// Independent components; a draw is a tuple.
    Product(Vec<Distribution>),
}

const JITTER: f64 = 1e-12;

pub fn gaussian(mean: f64, var: f64) -> Result<Distribution> {
    if var.is_nan() || var <= 0.0 || !mean.is_finite() {
        return dist_err(format!("gaussian({}, {}) needs a finite mean and a positive variance", mean, var));
    }
    Ok(Distribution::Gaussian(mean, var))
}

pub fn beta(a: f64, b: f64) -> Result<Distribution> {
    if !(a > 0.0 && b > 0.0) {
        return dist_err(format!("beta({}, {}) needs positive parameters", a, b));
    }
    Ok(Distribution::Beta(a, b))
}

pub fn bernoulli(p: f64) -> Result<Distribution> {
    if !(0.0..=1.0).contains(&p) {
        return dist_err(format!("bernoulli({}) needs 0 <= p <= 1", p));
    }
    Ok(Distribution::Bernoulli(p))
}

pub fn poisson(rate: f64) -> Result<Distribution> {
    if !(rate > 0.0 && rate.is_finite()) {
        return dist_err(format!("poisson({}) needs a positive rate", rate));
    }
    Ok(Distribution::Poisson(rate))
}

pub fn mv_gaussian(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Distribution> {
    if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
        return dist_err(format!(
            "mv_gaussian: mean of dimension {} with a {}x{} covariance",
            mean.len(),
            cov.nrows(),
            cov.ncols()
        ));
    }
    Ok(Distribution::MvGaussian(mean, cov))
}

/// Integers `lo..=hi`, uniformly.
pub fn uniform_int(lo: i64, hi: i64) -> Result<Distribution> {
    if hi < lo {
        return dist_err(format!("uniform_int({}, {}) is empty", lo, hi));
    }
    let p = 1.0 / (hi - lo + 1) as f64;
    Ok(Distribution::Categorical((lo..=hi).map(|k| (Value::Int(k), p)).collect()))
}

/// Normalized mixture. A single surviving component is returned as is.
pub fn mixture(components: Vec<(Distribution, f64)>) -> Result<Distribution> {
    let total: f64 = components.iter().map(|(_, w)| *w).sum();
    if components.iter().any(|(_, w)| *w < 0.0 || w.is_nan()) || !(total > 0.0) || !total.is_finite() {
        return dist_err("mixture weights must be non-negative and not all zero");
    }
    let mut kept: Vec<(Distribution, f64)> = components
        .into_iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(d, w)| (d, w / total))
        .collect();
    if kept.len() == 1 {
        return Ok(kept.pop().unwrap().0);
    }
    Ok(Distribution::Mixture(kept))
}

/// Normalized categorical over values; entries are kept separate even when equal.
pub fn categorical(entries: Vec<(Value, f64)>) -> Result<Distribution> {
    let total: f64 = entries.iter().map(|(_, w)| *w).sum();
    if entries.iter().any(|(_, w)| *w < 0.0 || w.is_nan()) || !(total > 0.0) || !total.is_finite() {
        return dist_err("categorical weights must be non-negative and not all zero");
    }
    Ok(Distribution::Categorical(
        entries.into_iter().map(|(v, w)| (v, w / total)).collect(),
    ))
}

/// Lower Cholesky factor, adding diagonal jitter when the matrix is only semi-definite.
pub fn cholesky_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(c) = Cholesky::<f64, Dyn>::new(cov.clone()) {
        return Ok(c.l());
    }
    let n = cov.nrows();
    let mut jitter = JITTER;
    for _ in 0..12 {
        let m = cov + DMatrix::<f64>::identity(n, n) * jitter;
        if let Some(c) = Cholesky::<f64, Dyn>::new(m) {
            return Ok(c.l());
        }
        jitter *= 10.0;
    }
    dist_err("covariance is not positive semi-definite")
}

fn ln_beta_fn(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

// (k - 1) * ln(x), with the convention 0 * ln 0 = 0.
fn xlogy(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * x.ln()
    }
}

impl Distribution {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        match self {
            Distribution::Dirac(v) => v.clone(),
            Distribution::Bernoulli(p) => Value::Bool(rng.random::<f64>() < *p),
            Distribution::Beta(a, b) => {
                let s = BetaSampler::new(*a, *b).expect("valid beta parameters");
                Value::Float(s.sample(rng))
            }
            Distribution::Gaussian(m, v) => {
                let z: f64 = rng.sample(StandardNormal);
                Value::Float(m + v.sqrt() * z)
            }
            Distribution::MvGaussian(m, cov) => {
                let l = cholesky_factor(cov).expect("positive semi-definite covariance");
                let z = DVector::from_fn(m.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
                Value::vector(m + l * z)
            }
            Distribution::Poisson(rate) => {
                let s = PoissonSampler::new(*rate).expect("valid poisson rate");
                Value::Int(s.sample(rng) as i64)
            }
            Distribution::Categorical(entries) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in entries {
                    acc += p;
                    if u < acc {
                        return v.clone();
                    }
                }
                entries.iter().rev().find(|(_, p)| *p > 0.0).map(|(v, _)| v.clone()).unwrap_or(Value::Nil)
            }
            Distribution::Mixture(comps) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (d, w) in comps {
                    acc += w;
                    if u < acc {
                        return d.draw(rng);
                    }
                }
                comps.last().map(|(d, _)| d.draw(rng)).unwrap_or(Value::Nil)
            }
            Distribution::Product(ds) => Value::tuple(ds.iter().map(|d| d.draw(rng)).collect()),
        }
    }

    pub fn has_density(&self) -> bool {
        match self {
            Distribution::Dirac(v) => v.is_discrete(),
            Distribution::Categorical(entries) => entries.iter().all(|(v, _)| v.is_discrete()),
            Distribution::Mixture(comps) => comps.iter().all(|(d, _)| d.has_density()),
            Distribution::Product(ds) => ds.iter().all(Distribution::has_density),
            _ => true,
        }
    }

    /// Natural-log density, or log mass for discrete variants.
    pub fn log_pdf(&self, v: &Value) -> Result<f64> {
        if !self.has_density() {
            return dist_err("density unavailable for this distribution");
        }
        match self {
            Distribution::Dirac(d) => Ok(if d == v { 0.0 } else { f64::NEG_INFINITY }),
            Distribution::Bernoulli(p) => {
                let b = v.as_bool()?;
                Ok(if b { p.ln() } else { (1.0 - p).ln() })
            }
            Distribution::Beta(a, b) => {
                let x = v.as_f64()?;
                if !(0.0..=1.0).contains(&x) {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(xlogy(a - 1.0, x) + xlogy(b - 1.0, 1.0 - x) - ln_beta_fn(*a, *b))
            }
            Distribution::Gaussian(m, var) => {
                let x = v.as_f64()?;
                let d = x - m;
                Ok(-0.5 * ((2.0 * PI * var).ln() + d * d / var))
            }
            Distribution::MvGaussian(m, cov) => {
                let x = v.as_vector()?;
                if x.len() != m.len() {
                    return dist_err("mv_gaussian: dimension mismatch in log_pdf");
                }
                let l = cholesky_factor(cov)?;
                let d = x - m;
                let z = l
                    .solve_lower_triangular(&d)
                    .ok_or_else(|| Error::Dist("singular covariance".into()))?;
                let log_det: f64 = 2.0 * l.diagonal().iter().map(|x| x.ln()).sum::<f64>();
                Ok(-0.5 * (m.len() as f64 * (2.0 * PI).ln() + log_det + z.dot(&z)))
            }
            Distribution::Poisson(rate) => {
                let k = v.as_int()?;
                if k < 0 {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(k as f64 * rate.ln() - rate - ln_gamma(k as f64 + 1.0))
            }
            Distribution::Categorical(entries) => {
                let mass: f64 = entries.iter().filter(|(x, _)| x == v).map(|(_, p)| *p).sum();
                Ok(mass.ln())
            }
            Distribution::Mixture(comps) => {
                let logs: Vec<f64> = comps
                    .iter()
                    .map(|(d, w)| Ok(w.ln() + d.log_pdf(v)?))
                    .collect::<Result<_>>()?;
                Ok(log_sum_exp(&logs))
            }
            Distribution::Product(ds) => {
                let xs = v.items()?;
                if xs.len() != ds.len() {
                    return dist_err("product: arity mismatch in log_pdf");
                }
                ds.iter().zip(xs).map(|(d, x)| d.log_pdf(x)).sum()
            }
        }
    }

    pub fn mean(&self) -> Result<Value> {
        Ok(self.mean_num()?.into_value())
    }

    /// Variance for scalars, covariance matrix for vectors, componentwise for tuples.
    pub fn variance(&self) -> Result<Value> {
        Ok(self.variance_num()?.into_value())
    }

    fn mean_num(&self) -> Result<Num> {
        match self {
            Distribution::Dirac(v) => Num::of_value(v),
            Distribution::Bernoulli(p) => Ok(Num::S(*p)),
            Distribution::Beta(a, b) => Ok(Num::S(a / (a + b))),
            Distribution::Gaussian(m, _) => Ok(Num::S(*m)),
            Distribution::MvGaussian(m, _) => Ok(Num::V(m.clone())),
            Distribution::Poisson(r) => Ok(Num::S(*r)),
            Distribution::Categorical(entries) => {
                weighted_sum(entries.iter().map(|(v, p)| Ok((Num::of_value(v)?, *p))))
            }
            Distribution::Mixture(comps) => weighted_sum(comps.iter().map(|(d, w)| Ok((d.mean_num()?, *w)))),
            Distribution::Product(ds) => Ok(Num::T(ds.iter().map(|d| d.mean_num()).collect::<Result<_>>()?)),
        }
    }

    fn variance_num(&self) -> Result<Num> {
        match self {
            Distribution::Dirac(v) => Ok(Num::of_value(v)?.spread(&Num::of_value(v)?)?),
            Distribution::Bernoulli(p) => Ok(Num::S(p * (1.0 - p))),
            Distribution::Beta(a, b) => {
                let s = a + b;
                Ok(Num::S(a * b / (s * s * (s + 1.0))))
            }
            Distribution::Gaussian(_, v) => Ok(Num::S(*v)),
            Distribution::MvGaussian(_, cov) => Ok(Num::M(cov.clone())),
            Distribution::Poisson(r) => Ok(Num::S(*r)),
            Distribution::Categorical(entries) => {
                let m = self.mean_num()?;
                weighted_sum(entries.iter().map(|(v, p)| Ok((Num::of_value(v)?.spread(&m)?, *p))))
            }
            Distribution::Mixture(comps) => {
                // Law of total variance: E[Var] + Var[E].
                let m = self.mean_num()?;
                weighted_sum(comps.iter().map(|(d, w)| {
                    let within = d.variance_num()?;
                    let between = d.mean_num()?.spread(&m)?;
                    Ok((within.add(&between)?, *w))
                }))
            }
            Distribution::Product(ds) => Ok(Num::T(ds.iter().map(|d| d.variance_num()).collect::<Result<_>>()?)),
        }
    }

    /// Finite support with probabilities, for exhaustive enumeration.
    pub fn finite_support(&self) -> Option<Vec<(Value, f64)>> {
        match self {
            Distribution::Dirac(v) => Some(vec![(v.clone(), 1.0)]),
            Distribution::Bernoulli(p) => Some(vec![(Value::Bool(true), *p), (Value::Bool(false), 1.0 - p)]),
            Distribution::Categorical(entries) => Some(entries.clone()),
            Distribution::Mixture(comps) => {
                let mut out = Vec::new();
                for (d, w) in comps {
                    for (v, p) in d.finite_support()? {
                        out.push((v, p * w));
                    }
                }
                Some(out)
            }
            Distribution::Product(ds) => {
                let mut acc: Vec<(Vec<Value>, f64)> = vec![(Vec::new(), 1.0)];
                for d in ds {
                    let sup = d.finite_support()?;
                    let mut next = Vec::with_capacity(acc.len() * sup.len());
                    for (prefix, p) in &acc {
                        for (v, q) in &sup {
                            let mut xs = prefix.clone();
                            xs.push(v.clone());
                            next.push((xs, p * q));
                        }
                    }
                    acc = next;
                }
                Some(acc.into_iter().map(|(xs, p)| (Value::tuple(xs), p)).collect())
            }
            _ => None,
        }
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Numeric view of a value used for moment computations.
#[derive(Clone, Debug)]
enum Num {
    S(f64),
    V(DVector<f64>),
    M(DMatrix<f64>),
    T(Vec<Num>),
}

fn weighted_sum(items: impl Iterator<Item = Result<(Num, f64)>>) -> Result<Num> {
    let mut acc: Option<Num> = None;
    for item in items {
        let (n, w) = item?;
        let scaled = n.scale(w);
        acc = Some(match acc {
            None => scaled,
            Some(a) => a.add(&scaled)?,
        });
    }
    acc.ok_or_else(|| Error::Dist("moment of an empty distribution".into()))
}

impl Num {
    fn of_value(v: &Value) -> Result<Num> {
        match v {
            Value::Bool(b) => Ok(Num::S(if *b { 1.0 } else { 0.0 })),
            Value::Int(n) => Ok(Num::S(*n as f64)),
            Value::Float(x) => Ok(Num::S(*x)),
            Value::Vector(x) => Ok(Num::V((**x).clone())),
            Value::Matrix(x) => Ok(Num::M((**x).clone())),
            Value::Tuple(xs) => Ok(Num::T(xs.iter().map(Num::of_value).collect::<Result<_>>()?)),
            Value::Unit => Ok(Num::T(Vec::new())),
            other => dist_err(format!("no moments for values of type {}", other.type_name())),
        }
    }

    fn into_value(self) -> Value {
        match self {
            Num::S(x) => Value::Float(x),
            Num::V(v) => Value::vector(v),
            Num::M(m) => Value::matrix(m),
            Num::T(xs) => Value::tuple(xs.into_iter().map(Num::into_value).collect()),
        }
    }

    fn scale(&self, w: f64) -> Num {
        match self {
            Num::S(x) => Num::S(x * w),
            Num::V(v) => Num::V(v * w),
            Num::M(m) => Num::M(m * w),
            Num::T(xs) => Num::T(xs.iter().map(|x| x.scale(w)).collect()),
        }
    }

    fn add(&self, other: &Num) -> Result<Num> {
        match (self, other) {
            (Num::S(a), Num::S(b)) => Ok(Num::S(a + b)),
            (Num::V(a), Num::V(b)) if a.len() == b.len() => Ok(Num::V(a + b)),
            (Num::M(a), Num::M(b)) if a.shape() == b.shape() => Ok(Num::M(a + b)),
            (Num::T(a), Num::T(b)) if a.len() == b.len() => {
                Ok(Num::T(a.iter().zip(b).map(|(x, y)| x.add(y)).collect::<Result<_>>()?))
            }
            _ => dist_err("moments over values of different shapes"),
        }
    }

    // Squared deviation from `m`: a square for scalars, an outer product for vectors.
    fn spread(&self, m: &Num) -> Result<Num> {
        match (self, m) {
            (Num::S(a), Num::S(b)) => Ok(Num::S((a - b) * (a - b))),
            (Num::V(a), Num::V(b)) if a.len() == b.len() => {
                let d = a - b;
                Ok(Num::M(&d * d.transpose()))
            }
            (Num::T(a), Num::T(b)) if a.len() == b.len() => {
                Ok(Num::T(a.iter().zip(b).map(|(x, y)| x.spread(y)).collect::<Result<_>>()?))
            }
            (Num::M(_), _) => dist_err("variance of a matrix-valued distribution is not supported"),
            _ => dist_err("moments over values of different shapes"),
        }
    }
}
