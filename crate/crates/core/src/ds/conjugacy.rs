//! Closed-form marginalization and conditioning for the supported
//! prior/likelihood pairs.

use nalgebra::{DMatrix, DVector};

use crate::dist::{self, Distribution};
use crate::error::{dist_err, Error, Result};
use crate::value::Value;

/// The distribution of a child given the value of its parent.
#[derive(Clone, Debug, PartialEq)]
pub enum Conditional {
    /// `X | Y ~ N(a*Y + b, var)`.
    GaussianOfAffine { a: f64, b: f64, var: f64 },
    /// `X | Y ~ N(A*Y + b, cov)` for a vector parent. With `scalar`, `A` has
    /// one row and the child is a float.
    MvGaussianOfAffine { a: DMatrix<f64>, b: DVector<f64>, cov: DMatrix<f64>, scalar: bool },
    /// `X | Y ~ Bernoulli(Y)` with `Y` a Beta.
    BernoulliOfBeta,
}

fn child_vector(v: &Value, scalar: bool) -> Result<DVector<f64>> {
    if scalar {
        Ok(DVector::from_element(1, v.as_f64()?))
    } else {
        Ok(v.as_vector()?.clone())
    }
}

fn mv_or_scalar(mean: DVector<f64>, cov: DMatrix<f64>, scalar: bool) -> Result<Distribution> {
    if scalar {
        dist::gaussian(mean[0], cov[(0, 0)])
    } else {
        dist::mv_gaussian(mean, cov)
    }
}

fn mismatch<T>(what: &str, parent: &Distribution) -> Result<T> {
    dist_err(format!("{} against a parent distributed as {:?}", what, parent))
}

impl Conditional {
    /// Distribution of the child when the parent is known to equal `y`.
    pub fn given(&self, y: &Value) -> Result<Distribution> {
        match self {
            Conditional::GaussianOfAffine { a, b, var } => dist::gaussian(a * y.as_f64()? + b, *var),
            Conditional::MvGaussianOfAffine { a, b, cov, scalar } => {
                mv_or_scalar(a * y.as_vector()? + b, cov.clone(), *scalar)
            }
            Conditional::BernoulliOfBeta => dist::bernoulli(y.as_f64()?),
        }
    }

    /// Marginal of the child, integrating out a parent distributed as `parent`.
    pub fn marginal(&self, parent: &Distribution) -> Result<Distribution> {
        match (self, parent) {
            (_, Distribution::Dirac(y)) => self.given(y),
            (Conditional::GaussianOfAffine { a, b, var }, Distribution::Gaussian(m, s)) => {
                dist::gaussian(a * m + b, a * a * s + var)
            }
            (Conditional::MvGaussianOfAffine { a, b, cov, scalar }, Distribution::MvGaussian(m, s)) => {
                mv_or_scalar(a * m + b, a * s * a.transpose() + cov, *scalar)
            }
            (Conditional::BernoulliOfBeta, Distribution::Beta(al, be)) => dist::bernoulli(al / (al + be)),
            _ => mismatch("marginalization", parent),
        }
    }

    /// Posterior of the parent once the child is observed at `x`.
    pub fn posterior(&self, parent: &Distribution, x: &Value) -> Result<Distribution> {
        match (self, parent) {
            (Conditional::GaussianOfAffine { a, b, var }, Distribution::Gaussian(m, s)) => {
                let x = x.as_f64()?;
                let total = a * a * s + var;
                let gain = s * a / total;
                dist::gaussian(m + gain * (x - (a * m + b)), s * var / total)
            }
            (Conditional::MvGaussianOfAffine { a, b, cov, scalar }, Distribution::MvGaussian(m, s)) => {
                let x = child_vector(x, *scalar)?;
                let s_at = s * a.transpose();
                let total = a * &s_at + cov;
                let inv = total
                    .clone()
                    .cholesky()
                    .map(|c| c.inverse())
                    .or_else(|| total.try_inverse())
                    .ok_or_else(|| Error::Dist("singular innovation covariance".into()))?;
                let gain = &s_at * inv;
                let mean = m + &gain * (x - (a * m + b));
                let post = s - &gain * a * s;
                let post = (&post + post.transpose()) * 0.5;
                dist::mv_gaussian(mean, post)
            }
            (Conditional::BernoulliOfBeta, Distribution::Beta(al, be)) => {
                if x.as_bool()? {
                    dist::beta(al + 1.0, *be)
                } else {
                    dist::beta(*al, be + 1.0)
                }
            }
            _ => mismatch("conditioning", parent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_gaussian_marginal() {
        let c = Conditional::GaussianOfAffine { a: 2.0, b: 1.0, var: 0.5 };
        assert_eq!(c.marginal(&Distribution::Gaussian(0.0, 1.0)).unwrap(), Distribution::Gaussian(1.0, 4.5));
    }

    #[test]
    fn beta_bernoulli_marginal_and_posterior() {
        let c = Conditional::BernoulliOfBeta;
        assert_eq!(c.marginal(&Distribution::Beta(1.0, 1.0)).unwrap(), Distribution::Bernoulli(0.5));
        let p = c.posterior(&Distribution::Beta(1.0, 1.0), &Value::Bool(true)).unwrap();
        assert_eq!(p, Distribution::Beta(2.0, 1.0));
        let q = c.posterior(&Distribution::Beta(2.0, 3.0), &Value::Bool(false)).unwrap();
        assert_eq!(q, Distribution::Beta(2.0, 4.0));
    }

    #[test]
    fn gaussian_posterior_halves_variance() {
        let c = Conditional::GaussianOfAffine { a: 1.0, b: 0.0, var: 1.0 };
        let p = c.posterior(&Distribution::Gaussian(0.0, 1.0), &Value::Float(0.0)).unwrap();
        assert_eq!(p, Distribution::Gaussian(0.0, 0.5));
    }

    #[test]
    fn realized_parent_folds() {
        let c = Conditional::GaussianOfAffine { a: 1.0, b: 0.0, var: 1.0 };
        let d = c.marginal(&Distribution::Dirac(Value::Float(3.0))).unwrap();
        assert_eq!(d, Distribution::Gaussian(3.0, 1.0));
    }

    #[test]
    fn one_row_vector_case_matches_scalar_case() {
        let a = DMatrix::from_row_slice(1, 1, &[2.0]);
        let mv = Conditional::MvGaussianOfAffine {
            a,
            b: DVector::from_element(1, 1.0),
            cov: DMatrix::from_element(1, 1, 0.5),
            scalar: true,
        };
        let parent = Distribution::MvGaussian(DVector::from_element(1, 0.3), DMatrix::from_element(1, 1, 1.7));
        let sc = Conditional::GaussianOfAffine { a: 2.0, b: 1.0, var: 0.5 };
        let sparent = Distribution::Gaussian(0.3, 1.7);
        assert_eq!(mv.marginal(&parent).unwrap(), sc.marginal(&sparent).unwrap());
        let x = Value::Float(2.2);
        match (mv.posterior(&parent, &x).unwrap(), sc.posterior(&sparent, &x).unwrap()) {
            (Distribution::MvGaussian(m, s), Distribution::Gaussian(m2, s2)) => {
                assert!((m[0] - m2).abs() < 1e-12);
                assert!((s[(0, 0)] - s2).abs() < 1e-12);
            }
            other => panic!("{:?}", other),
        }
    }
}
