//! Losses of the benchmarks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn same_length(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Config(format!("streams of different lengths: {} and {}", a, b)));
    }
    Ok(())
}

/// Squared error between an estimate and the truth, averaged over components.
pub fn squared_error(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    same_length(estimate.len(), truth.len())?;
    if truth.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = estimate.iter().zip(truth).map(|(e, t)| (e - t) * (e - t)).sum();
    Ok(total / truth.len() as f64)
}

/// Mean over steps of the squared error of the estimates.
pub fn mse_loss(estimates: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<f64> {
    same_length(estimates.len(), truth.len())?;
    if truth.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (e, t) in estimates.iter().zip(truth) {
        total += squared_error(e, t)?;
    }
    Ok(total / truth.len() as f64)
}

/// Quadratic cost of one step: x'Qx + u'Ru.
pub fn lqr_cost(x: &DVector<f64>, u: &DVector<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>) -> f64 {
    (x.transpose() * q * x)[(0, 0)] + (u.transpose() * r * u)[(0, 0)]
}

/// Cost of a whole trajectory.
pub fn lqr_loss(states: &[DVector<f64>], commands: &[DVector<f64>], q: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<f64> {
    same_length(states.len(), commands.len())?;
    Ok(states.iter().zip(commands).map(|(x, u)| lqr_cost(x, u, q, r)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_of_identical_streams_is_zero() {
        let s = vec![vec![1.0, 2.0], vec![-3.0, 0.5]];
        assert_eq!(mse_loss(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_of_two_costs_four() {
        let truth: Vec<Vec<f64>> = (0..17).map(|t| vec![t as f64 * 0.3]).collect();
        let est: Vec<Vec<f64>> = truth.iter().map(|v| vec![v[0] + 2.0]).collect();
        assert!((mse_loss(&est, &truth).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        assert!(mse_loss(&[vec![1.0]], &[]).is_err());
        let x = vec![DVector::zeros(2)];
        assert!(lqr_loss(&x, &[], &DMatrix::identity(2, 2), &DMatrix::identity(1, 1)).is_err());
    }

    #[test]
    fn lqr_loss_examples() {
        let q = DMatrix::identity(3, 3);
        let r = DMatrix::identity(1, 1);
        let zeros = vec![DVector::zeros(3); 4];
        let u0 = vec![DVector::zeros(1); 4];
        assert_eq!(lqr_loss(&zeros, &u0, &q, &r).unwrap(), 0.0);
        let x = vec![DVector::from_column_slice(&[1.0, 0.0, 0.0])];
        assert_eq!(lqr_loss(&x, &u0[..1], &q, &r).unwrap(), 1.0);
    }
}
