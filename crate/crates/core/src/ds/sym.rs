//! Symbolic terms over random variables.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::ds::node::{Family, NodeRef};
use crate::ops::Op;
use crate::value::Value;

/// Affine forms are kept normalized: they always apply directly to a node.
#[derive(Clone)]
pub enum SymExpr {
    Const(Value),
    RVar(NodeRef),
    /// `a * x + b` for a scalar Gaussian node `x`.
    Affine { a: f64, x: NodeRef, b: f64 },
    /// `m * x + b` for a vector node `x`; with `scalar`, `m` has one row and
    /// the term is a float.
    AffineVec { m: DMatrix<f64>, x: NodeRef, b: DVector<f64>, scalar: bool },
    /// An operator applied to arguments that mention random variables.
    App(Op, Vec<Value>),
}

impl SymExpr {
    /// The term as an affine function of one scalar Gaussian node.
    pub fn as_affine(&self) -> Option<(f64, NodeRef, f64)> {
        match self {
            SymExpr::RVar(x) if x.family() == Family::Gaussian => Some((1.0, x.clone(), 0.0)),
            SymExpr::Affine { a, x, b } => Some((*a, x.clone(), *b)),
            _ => None,
        }
    }

    /// The term as an affine function of one vector node; `scalar` tells
    /// whether the term itself is a float.
    pub fn as_affine_vec(&self) -> Option<(DMatrix<f64>, NodeRef, DVector<f64>, bool)> {
        match self {
            SymExpr::AffineVec { m, x, b, scalar } => Some((m.clone(), x.clone(), b.clone(), *scalar)),
            SymExpr::RVar(x) if x.family() == Family::MvGaussian => {
                let d = vector_dim(x)?;
                Some((DMatrix::identity(d, d), x.clone(), DVector::zeros(d), false))
            }
            _ => None,
        }
    }

    /// Every node mentioned, in order of appearance.
    pub fn nodes(&self, out: &mut Vec<NodeRef>) {
        match self {
            SymExpr::Const(v) => value_nodes(v, out),
            SymExpr::RVar(x) | SymExpr::Affine { x, .. } | SymExpr::AffineVec { x, .. } => {
                if !out.iter().any(|y| y.ptr_eq(x)) {
                    out.push(x.clone());
                }
            }
            SymExpr::App(_, args) => {
                for a in args {
                    value_nodes(a, out);
                }
            }
        }
    }
}

pub fn value_nodes(v: &Value, out: &mut Vec<NodeRef>) {
    match v {
        Value::Sym(e) => e.nodes(out),
        Value::Tuple(xs) => {
            for x in xs.iter() {
                value_nodes(x, out);
            }
        }
        _ => {}
    }
}

/// Dimension of a vector node, read from its current distribution.
fn vector_dim(x: &NodeRef) -> Option<usize> {
    use crate::dist::Distribution;
    use crate::ds::conjugacy::Conditional;
    use crate::ds::node::Status;
    match x.status() {
        Status::Realized(Value::Vector(v)) => Some(v.len()),
        Status::Marginalized { marginal: Distribution::MvGaussian(m, _), .. } => Some(m.len()),
        Status::Initialized { cond: Conditional::MvGaussianOfAffine { b, .. }, .. } => Some(b.len()),
        _ => None,
    }
}

impl fmt::Debug for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymExpr::Const(v) => write!(f, "{}", v),
            SymExpr::RVar(x) => write!(f, "{:?}", x),
            SymExpr::Affine { a, x, b } => write!(f, "{:?}*{:?}+{:?}", a, x, b),
            SymExpr::AffineVec { x, scalar, .. } => {
                write!(f, "affine{}({:?})", if *scalar { "" } else { "_vec" }, x)
            }
            SymExpr::App(op, args) => {
                write!(f, "{}(", op)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
        }
    }
}
