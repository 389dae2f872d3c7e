//! Discrete-time linear-quadratic regulator.

use std::cell::RefCell;
use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Debug)]
pub struct LqrGain {
    /// Feedback gain: the command is `-k * state`.
    pub k: DMatrix<f64>,
    /// Fixed point of the Riccati recursion.
    pub p: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

fn gain_for(p: &DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let bt_p = b.transpose() * p;
    let s = r + &bt_p * b;
    let s_inv = s
        .try_inverse()
        .ok_or_else(|| Error::Eval("lqr: R + B'PB is singular".into()))?;
    Ok(s_inv * bt_p * a)
}

/// Solves the discrete algebraic Riccati equation by fixed-point iteration.
pub fn lqr_gain(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<LqrGain> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || q.shape() != (n, n) || r.shape() != (b.ncols(), b.ncols()) {
        return Err(Error::Eval("lqr: inconsistent matrix dimensions".into()));
    }
    let mut p = q.clone();
    for _ in 0..MAX_ITERATIONS {
        let k = gain_for(&p, a, b, r)?;
        let next = q + a.transpose() * &p * a - a.transpose() * &p * b * &k;
        let next = (&next + next.transpose()) * 0.5;
        let residual = (&next - &p).norm();
        p = next;
        if residual < TOLERANCE {
            let k = gain_for(&p, a, b, r)?;
            return Ok(LqrGain {
                k,
                p,
                a: a.clone(),
                b: b.clone(),
                q: q.clone(),
                r: r.clone(),
            });
        }
        if !residual.is_finite() {
            break;
        }
    }
    Err(Error::Eval("lqr: Riccati iteration did not converge".into()))
}

thread_local! {
    static GAINS: RefCell<HashMap<Vec<u64>, DMatrix<f64>>> = RefCell::new(HashMap::new());
}

/// The `lqr a b x` builtin: `-K x` with identity state and command costs.
pub fn command(a: &DMatrix<f64>, b: &DMatrix<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
    let key: Vec<u64> = [a.nrows() as u64, b.ncols() as u64]
        .into_iter()
        .chain(a.iter().chain(b.iter()).map(|x| x.to_bits()))
        .collect();
    let cached = GAINS.with(|g| g.borrow().get(&key).cloned());
    let k = match cached {
        Some(k) => k,
        None => {
            let n = a.nrows();
            let m = b.ncols();
            let gain = lqr_gain(a, b, &DMatrix::identity(n, n), &DMatrix::identity(m, m))?;
            GAINS.with(|g| g.borrow_mut().insert(key, gain.k.clone()));
            gain.k
        }
    };
    if x.len() != k.ncols() {
        return Err(Error::Eval("lqr: state estimate has the wrong dimension".into()));
    }
    Ok(-(k * x))
}
