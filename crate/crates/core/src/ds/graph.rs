//! Graph operations: assume, marginalize, realize, force and the
//! non-mutating distribution snapshot.
//!
//! Links are one-way in the streaming variant. An initialized node points to
//! its parent; a marginalized node points to its marginalized child. When
//! that child is realized the parent is conditioned lazily, the next time it
//! is inspected.

use std::sync::atomic::AtomicI64;
use std::sync::Arc;

use rand::Rng;

use crate::dist::Distribution;
use crate::ds::conjugacy::Conditional;
use crate::ds::node::{Family, NodeRef, Status};
use crate::ds::sym::SymExpr;
use crate::error::{eval_err, Error, Result};
use crate::ops;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Original delayed sampling: every node is kept in a registry.
    Naive,
    /// Pointer-minimal: nodes live only while reachable.
    Streaming,
}

/// The graph of one particle.
pub struct Graph {
    pub variant: Variant,
    pub live: Arc<AtomicI64>,
    pub registry: Vec<NodeRef>,
}

impl Graph {
    pub fn new(variant: Variant, live: Arc<AtomicI64>) -> Graph {
        Graph { variant, live, registry: Vec::new() }
    }

    fn add(&mut self, family: Family, status: Status) -> NodeRef {
        let n = NodeRef::new(family, status, &self.live);
        if self.variant == Variant::Naive {
            self.registry.push(n.clone());
        }
        n
    }

    /// A root node with a known marginal.
    pub fn root(&mut self, d: Distribution) -> Result<NodeRef> {
        let family = match Family::of(&d) {
            Some(f) => f,
            None => return eval_err(format!("no delayed-sampling node for {:?}", d)),
        };
        Ok(self.add(family, Status::Marginalized { marginal: d, child: None }))
    }

    /// A child of `parent` with conditional `cond`. Against a realized parent
    /// the conditional is folded and the child is a root.
    pub fn initialize(&mut self, family: Family, cond: Conditional, parent: &NodeRef) -> Result<NodeRef> {
        if let Some(y) = parent.realized_value() {
            let d = cond.given(&y)?;
            return Ok(self.add(family, Status::Marginalized { marginal: d, child: None }));
        }
        Ok(self.add(family, Status::Initialized { parent: parent.clone(), cond }))
    }

    /// Conditions a marginalized node on its child if that child has been realized.
    pub fn refresh(&self, n: &NodeRef) -> Result<()> {
        let mut cell = n.lock();
        if let Status::Marginalized { marginal, child: Some((c, cond)) } = &cell.status {
            if let Some(v) = c.realized_value() {
                let post = cond.posterior(marginal, &v)?;
                cell.status = Status::Marginalized { marginal: post, child: None };
            }
        }
        Ok(())
    }

    /// Marginalizes an initialized node, and its initialized ancestors first.
    pub fn marginalize<R: Rng + ?Sized>(&mut self, n: &NodeRef, rng: &mut R) -> Result<()> {
        let mut chain = vec![n.clone()];
        loop {
            let parent = match &chain.last().unwrap().lock().status {
                Status::Initialized { parent, .. } => parent.clone(),
                _ => break,
            };
            if matches!(parent.lock().status, Status::Initialized { .. }) {
                chain.push(parent);
            } else {
                break;
            }
        }
        for node in chain.iter().rev() {
            self.marginalize_one(node, rng)?;
        }
        Ok(())
    }

    fn marginalize_one<R: Rng + ?Sized>(&mut self, n: &NodeRef, rng: &mut R) -> Result<()> {
        let (parent, cond) = match n.status() {
            Status::Initialized { parent, cond } => (parent, cond),
            _ => return Ok(()),
        };
        self.refresh(&parent)?;
        let mut up = None;
        let marginal = match parent.status() {
            Status::Realized(y) => cond.given(&y)?,
            Status::Marginalized { child, .. } => {
                // At most one marginalized child: an existing one is sampled first.
                if let Some((c, _)) = child {
                    self.force_node(&c, rng)?;
                    self.refresh(&parent)?;
                }
                let mut cell = parent.lock();
                let m = match &cell.status {
                    Status::Marginalized { marginal, .. } => cond.marginal(marginal)?,
                    _ => unreachable!("parent stays marginalized"),
                };
                cell.status = match std::mem::replace(&mut cell.status, Status::Realized(Value::Unit)) {
                    Status::Marginalized { marginal, .. } => {
                        Status::Marginalized { marginal, child: Some((n.clone(), cond)) }
                    }
                    _ => unreachable!(),
                };
                up = Some(parent.downgrade());
                m
            }
            Status::Initialized { .. } => unreachable!("ancestors are marginalized first"),
        };
        let mut cell = n.lock();
        cell.status = Status::Marginalized { marginal, child: None };
        if self.variant == Variant::Naive {
            cell.up = up;
        }
        Ok(())
    }

    /// Assigns a value to a marginalized node.
    pub fn realize(&mut self, n: &NodeRef, v: Value) -> Result<()> {
        let up = {
            let mut cell = n.lock();
            if matches!(cell.status, Status::Initialized { .. }) {
                return eval_err("realizing a node that is not marginalized");
            }
            cell.status = Status::Realized(v);
            cell.up.take()
        };
        if let Some(p) = up.and_then(|w| w.upgrade()) {
            self.refresh(&NodeRef(p))?;
        }
        Ok(())
    }

    /// Draws a value for the node. Its marginalized descendants are drawn
    /// first, from the tail of the chain back, conditioning each parent.
    pub fn force_node<R: Rng + ?Sized>(&mut self, n: &NodeRef, rng: &mut R) -> Result<Value> {
        match n.status() {
            Status::Realized(v) => return Ok(v),
            Status::Initialized { .. } => self.marginalize(n, rng)?,
            Status::Marginalized { .. } => {}
        }
        let mut chain = vec![n.clone()];
        loop {
            let last = chain.last().unwrap().clone();
            self.refresh(&last)?;
            let next = match &last.lock().status {
                Status::Marginalized { child: Some((c, _)), .. } => Some(c.clone()),
                _ => None,
            };
            match next {
                Some(c) => chain.push(c),
                None => break,
            }
        }
        let mut value = Value::Unit;
        for node in chain.iter().rev() {
            self.refresh(node)?;
            let d = match &node.lock().status {
                Status::Marginalized { marginal, .. } => marginal.clone(),
                Status::Realized(v) => Distribution::Dirac(v.clone()),
                Status::Initialized { .. } => unreachable!(),
            };
            value = d.draw(rng);
            self.realize(node, value.clone())?;
        }
        Ok(value)
    }

    /// Replaces every random variable of a value by a drawn value.
    pub fn force<R: Rng + ?Sized>(&mut self, v: &Value, rng: &mut R) -> Result<Value> {
        match v {
            Value::Sym(e) => self.force_sym(e, rng),
            Value::Tuple(xs) if v.has_sym() => {
                let mut out = Vec::with_capacity(xs.len());
                for x in xs.iter() {
                    out.push(self.force(x, rng)?);
                }
                Ok(Value::Tuple(out.into()))
            }
            _ => Ok(v.clone()),
        }
    }

    fn force_sym<R: Rng + ?Sized>(&mut self, e: &SymExpr, rng: &mut R) -> Result<Value> {
        match e {
            SymExpr::Const(v) => Ok(v.clone()),
            SymExpr::RVar(x) => self.force_node(x, rng),
            SymExpr::Affine { a, x, b } => Ok(Value::Float(a * self.force_node(x, rng)?.as_f64()? + b)),
            SymExpr::AffineVec { m, x, b, scalar } => {
                let y = self.force_node(x, rng)?;
                Ok(affine_vec_value(m, y.as_vector()?, b, *scalar))
            }
            SymExpr::App(op, args) => {
                let mut xs = Vec::with_capacity(args.len());
                for a in args {
                    xs.push(self.force(a, rng)?);
                }
                let arg = if xs.len() == 1 { xs.pop().unwrap() } else { Value::tuple(xs) };
                ops::apply(*op, &arg)
            }
        }
    }
}

pub fn affine_vec_value(m: &nalgebra::DMatrix<f64>, y: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>, scalar: bool) -> Value {
    let r = m * y + b;
    if scalar {
        Value::Float(r[0])
    } else {
        Value::vector(r)
    }
}

/// Current distribution of a node, without changing the graph.
pub fn node_distribution(n: &NodeRef) -> Result<Distribution> {
    let mut conds = Vec::new();
    let mut cur = n.clone();
    let base = loop {
        let next = match &cur.lock().status {
            Status::Realized(v) => break Distribution::Dirac(v.clone()),
            Status::Marginalized { marginal, child } => {
                if let Some((c, cond)) = child {
                    if let Some(v) = c.realized_value() {
                        break cond.posterior(marginal, &v)?;
                    }
                }
                break marginal.clone();
            }
            Status::Initialized { parent, cond } => {
                conds.push(cond.clone());
                parent.clone()
            }
        };
        cur = next;
    };
    let mut d = base;
    for cond in conds.iter().rev() {
        d = cond.marginal(&d)?;
    }
    Ok(d)
}

/// The distribution of a value mentioning random variables, without
/// changing the graph. Components of a tuple are treated as independent.
pub fn distribution_of(v: &Value) -> Result<Distribution> {
    match v {
        Value::Sym(e) => sym_distribution(e),
        Value::Tuple(xs) if v.has_sym() => {
            Ok(Distribution::Product(xs.iter().map(distribution_of).collect::<Result<_>>()?))
        }
        _ => Ok(Distribution::Dirac(v.clone())),
    }
}

fn sym_distribution(e: &SymExpr) -> Result<Distribution> {
    match e {
        SymExpr::Const(v) => Ok(Distribution::Dirac(v.clone())),
        SymExpr::RVar(x) => node_distribution(x),
        SymExpr::Affine { a, x, b } => match node_distribution(x)? {
            Distribution::Dirac(y) => Ok(Distribution::Dirac(Value::Float(a * y.as_f64()? + b))),
            Distribution::Gaussian(m, s) if *a != 0.0 => Ok(Distribution::Gaussian(a * m + b, a * a * s)),
            Distribution::Gaussian(..) => Ok(Distribution::Dirac(Value::Float(*b))),
            _ => Err(Error::NoClosedForm),
        },
        SymExpr::AffineVec { m, x, b, scalar } => match node_distribution(x)? {
            Distribution::Dirac(y) => Ok(Distribution::Dirac(affine_vec_value(m, y.as_vector()?, b, *scalar))),
            Distribution::MvGaussian(mu, s) => {
                let mean = m * mu + b;
                let cov = m * s * m.transpose();
                Ok(if *scalar {
                    Distribution::Gaussian(mean[0], cov[(0, 0)])
                } else {
                    Distribution::MvGaussian(mean, cov)
                })
            }
            _ => Err(Error::NoClosedForm),
        },
        SymExpr::App(op, args) => {
            // Closed form only once every argument is known.
            let mut xs = Vec::with_capacity(args.len());
            for a in args {
                match distribution_of(a)? {
                    Distribution::Dirac(v) => xs.push(v),
                    _ => return Err(Error::NoClosedForm),
                }
            }
            let arg = if xs.len() == 1 { xs.pop().unwrap() } else { Value::tuple(xs) };
            Ok(Distribution::Dirac(ops::apply(*op, &arg)?))
        }
    }
}
