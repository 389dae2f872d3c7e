//! The evaluator handler of the delayed-sampling engines.

use nalgebra::DMatrix;

use crate::dist::Distribution;
use crate::ds::conjugacy::Conditional;
use crate::ds::graph::{affine_vec_value, Graph};
use crate::ds::node::{Family, NodeRef};
use crate::ds::sym::SymExpr;
use crate::error::{dist_err, eval_err, Result};
use crate::infer::rng::Rng;
use crate::muf::Handler;
use crate::ops::{self, Op};
use crate::value::Value;

pub struct DsHandler<'a> {
    pub graph: Graph,
    pub rng: &'a mut Rng,
    pub log_weight: f64,
    pub context: u64,
}

fn sym_of(v: &Value) -> Option<&SymExpr> {
    match v {
        Value::Sym(e) => Some(e),
        _ => None,
    }
}

fn affine(a: f64, x: NodeRef, b: f64) -> Value {
    if a == 0.0 {
        Value::Float(b)
    } else {
        Value::sym(SymExpr::Affine { a, x, b })
    }
}

fn constant(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        _ => None,
    }
}

impl<'a> DsHandler<'a> {
    pub fn new(graph: Graph, rng: &'a mut Rng, context: u64) -> DsHandler<'a> {
        DsHandler { graph, rng, log_weight: 0.0, context }
    }

    /// Substitutes realized random variables by their values.
    pub fn resolve(&self, v: &Value) -> Result<Value> {
        match v {
            Value::Sym(e) => self.resolve_sym(e),
            Value::Tuple(xs) if v.has_sym() => {
                let mut out = Vec::with_capacity(xs.len());
                for x in xs.iter() {
                    out.push(self.resolve(x)?);
                }
                Ok(Value::Tuple(out.into()))
            }
            _ => Ok(v.clone()),
        }
    }

    fn resolve_sym(&self, e: &SymExpr) -> Result<Value> {
        match e {
            SymExpr::Const(v) => Ok(v.clone()),
            SymExpr::RVar(x) => Ok(x.realized_value().unwrap_or_else(|| Value::sym(e.clone()))),
            SymExpr::Affine { a, x, b } => match x.realized_value() {
                Some(y) => Ok(Value::Float(a * y.as_f64()? + b)),
                None => Ok(Value::sym(e.clone())),
            },
            SymExpr::AffineVec { m, x, b, scalar } => match x.realized_value() {
                Some(y) => Ok(affine_vec_value(m, y.as_vector()?, b, *scalar)),
                None => Ok(Value::sym(e.clone())),
            },
            SymExpr::App(op, args) => {
                let mut xs = Vec::with_capacity(args.len());
                for a in args {
                    xs.push(self.resolve(a)?);
                }
                if xs.iter().any(Value::has_sym) {
                    return Ok(Value::sym(SymExpr::App(*op, xs)));
                }
                let arg = if xs.len() == 1 { xs.pop().unwrap() } else { Value::tuple(xs) };
                ops::apply(*op, &arg)
            }
        }
    }

    fn force_value(&mut self, v: &Value) -> Result<Value> {
        self.graph.force(v, &mut *self.rng)
    }

    /// Forces every argument except those at the positions in `keep`.
    fn force_except(&mut self, args: &[Value], keep: &[usize]) -> Result<Vec<Value>> {
        let mut out = Vec::with_capacity(args.len());
        for (i, a) in args.iter().enumerate() {
            out.push(if keep.contains(&i) { a.clone() } else { self.force_value(a)? });
        }
        Ok(out)
    }

    fn apply_forced(&mut self, op: Op, args: &[Value]) -> Result<Value> {
        let mut xs = self.force_except(args, &[])?;
        let arg = if xs.len() == 1 { xs.pop().unwrap() } else { Value::tuple(xs) };
        ops::apply(op, &arg)
    }

    /// A distribution term: kept symbolic when it matches a conjugacy,
    /// otherwise built from forced parameters.
    fn dist_term(&mut self, op: Op, args: Vec<Value>) -> Result<Value> {
        let conjugate = match op {
            Op::Gaussian => sym_of(&args[0]).is_some_and(|e| {
                e.as_affine().is_some() || e.as_affine_vec().is_some_and(|(_, _, _, scalar)| scalar)
            }),
            Op::MvGaussian => sym_of(&args[0]).is_some_and(|e| e.as_affine_vec().is_some_and(|(.., s)| !s)),
            Op::Bernoulli => {
                sym_of(&args[0]).is_some_and(|e| matches!(e, SymExpr::RVar(x) if x.family() == Family::Beta))
            }
            _ => false,
        };
        if !conjugate {
            return self.apply_forced(op, &args);
        }
        let args = self.force_except(&args, &[0])?;
        Ok(Value::sym(SymExpr::App(op, args)))
    }

    fn arith(&mut self, op: Op, args: Vec<Value>) -> Result<Value> {
        let sym = |v: &Value| sym_of(v).and_then(SymExpr::as_affine);
        let lazy = |args: Vec<Value>| Ok(Value::sym(SymExpr::App(op, args)));
        match op {
            Op::Neg => match sym(&args[0]) {
                Some((a, x, b)) => Ok(affine(-a, x, -b)),
                None => lazy(args),
            },
            Op::Add | Op::Sub => {
                let sign = if op == Op::Add { 1.0 } else { -1.0 };
                match (sym(&args[0]), sym(&args[1]), constant(&args[0]), constant(&args[1])) {
                    (Some((a, x, b)), _, _, Some(c)) => Ok(affine(a, x, b + sign * c)),
                    (_, Some((a, x, b)), Some(c), _) => Ok(affine(sign * a, x, c + sign * b)),
                    (Some((a1, x1, b1)), Some((a2, x2, b2)), _, _) if x1.ptr_eq(&x2) => {
                        Ok(affine(a1 + sign * a2, x1, b1 + sign * b2))
                    }
                    _ => lazy(args),
                }
            }
            Op::Mul => match (sym(&args[0]), sym(&args[1]), constant(&args[0]), constant(&args[1])) {
                (Some((a, x, b)), _, _, Some(c)) | (_, Some((a, x, b)), Some(c), _) => Ok(affine(a * c, x, b * c)),
                _ => lazy(args),
            },
            Op::Div => match (sym(&args[0]), constant(&args[1])) {
                (Some((a, x, b)), Some(c)) => Ok(affine(a / c, x, b / c)),
                _ => lazy(args),
            },
            _ => lazy(args),
        }
    }

    fn vector_op(&mut self, op: Op, args: Vec<Value>) -> Result<Value> {
        let vsym = |v: &Value| sym_of(v).and_then(SymExpr::as_affine_vec);
        match op {
            Op::VAdd | Op::VSub => {
                let sign = if op == Op::VAdd { 1.0 } else { -1.0 };
                match (vsym(&args[0]), vsym(&args[1]), &args[0], &args[1]) {
                    (Some((m, x, b, false)), None, _, Value::Vector(c)) => {
                        return Ok(Value::sym(SymExpr::AffineVec { m, x, b: b + &**c * sign, scalar: false }))
                    }
                    (None, Some((m, x, b, false)), Value::Vector(c), _) => {
                        return Ok(Value::sym(SymExpr::AffineVec {
                            m: m * sign,
                            x,
                            b: &**c + b * sign,
                            scalar: false,
                        }))
                    }
                    (Some((m1, x1, b1, false)), Some((m2, x2, b2, false)), _, _) if x1.ptr_eq(&x2) => {
                        return Ok(Value::sym(SymExpr::AffineVec {
                            m: m1 + m2 * sign,
                            x: x1,
                            b: b1 + b2 * sign,
                            scalar: false,
                        }))
                    }
                    _ => {}
                }
            }
            Op::MatMul => {
                if let (Value::Matrix(k), Some((m, x, b, false))) = (&args[0], vsym(&args[1])) {
                    return Ok(Value::sym(SymExpr::AffineVec { m: &**k * m, x, b: &**k * b, scalar: false }));
                }
            }
            Op::VecGet | Op::Get => {
                if let (Some((m, x, b, false)), Value::Int(i)) = (vsym(&args[0]), &args[1]) {
                    let i = *i;
                    if i < 0 || i as usize >= m.nrows() {
                        return eval_err(format!("index {} out of a vector of size {}", i, m.nrows()));
                    }
                    let row = DMatrix::from_rows(&[m.row(i as usize).into_owned()]);
                    let b = nalgebra::DVector::from_element(1, b[i as usize]);
                    return Ok(Value::sym(SymExpr::AffineVec { m: row, x, b, scalar: true }));
                }
            }
            _ => {}
        }
        self.apply_forced(op, &args)
    }

    /// Adds a random variable distributed as `d` to the graph. Returns
    /// `None` for distributions that are sampled directly.
    fn assume(&mut self, d: &Value) -> Result<Option<NodeRef>> {
        let d = self.resolve(d)?;
        match &d {
            Value::Dist(dist) => match Family::of(dist) {
                Some(_) => Ok(Some(self.graph.root((**dist).clone())?)),
                None => Ok(None),
            },
            Value::Sym(e) => match &**e {
                SymExpr::App(op, args) => self.assume_conjugate(*op, args).map(Some),
                _ => eval_err("sampling from a term that is not a distribution"),
            },
            other => eval_err(format!("expected a distribution, found {}", other.type_name())),
        }
    }

    fn assume_conjugate(&mut self, op: Op, args: &[Value]) -> Result<NodeRef> {
        let e = sym_of(&args[0]).expect("conjugate terms have a symbolic first parameter");
        match op {
            Op::Gaussian => {
                let var = args[1].as_f64()?;
                if !(var > 0.0) {
                    return dist_err(format!("gaussian variance {} is not positive", var));
                }
                if let Some((a, x, b)) = e.as_affine() {
                    return self.graph.initialize(Family::Gaussian, Conditional::GaussianOfAffine { a, b, var }, &x);
                }
                let (m, x, b, _) = e.as_affine_vec().expect("checked by dist_term");
                let cov = DMatrix::from_element(1, 1, var);
                self.graph.initialize(
                    Family::Gaussian,
                    Conditional::MvGaussianOfAffine { a: m, b, cov, scalar: true },
                    &x,
                )
            }
            Op::MvGaussian => {
                let cov = args[1].as_matrix()?.clone();
                let (m, x, b, _) = e.as_affine_vec().expect("checked by dist_term");
                if cov.nrows() != m.nrows() || cov.ncols() != m.nrows() {
                    return dist_err("mv_gaussian: mean and covariance dimensions differ");
                }
                self.graph.initialize(
                    Family::MvGaussian,
                    Conditional::MvGaussianOfAffine { a: m, b, cov, scalar: false },
                    &x,
                )
            }
            Op::Bernoulli => match e {
                SymExpr::RVar(x) => self.graph.initialize(Family::Bernoulli, Conditional::BernoulliOfBeta, x),
                _ => unreachable!("checked by dist_term"),
            },
            _ => unreachable!("only conjugate constructors stay symbolic"),
        }
    }

    /// Forces the whole state, as bounded delayed sampling does at the end of a step.
    pub fn force_all(&mut self, v: &Value) -> Result<Value> {
        self.force_value(v)
    }
}

impl Handler for DsHandler<'_> {
    fn sample(&mut self, d: Value) -> Result<Value> {
        match self.assume(&d)? {
            Some(x) => Ok(Value::sym(SymExpr::RVar(x))),
            None => {
                let d = self.resolve(&d)?;
                Ok(d.as_dist()?.draw(&mut *self.rng))
            }
        }
    }

    fn observe(&mut self, d: Value, v: Value) -> Result<()> {
        let v = self.force_value(&v)?;
        let d = self.resolve(&d)?;
        if let Value::Dist(dist) = &d {
            if !dist.has_density() {
                return dist_err("observe on a distribution without density");
            }
            self.log_weight += dist.log_pdf(&v)?;
            return Ok(());
        }
        let x = match self.assume(&d)? {
            Some(x) => x,
            None => unreachable!("symbolic distributions always create a node"),
        };
        self.graph.marginalize(&x, &mut *self.rng)?;
        let marginal = match x.status() {
            crate::ds::node::Status::Marginalized { marginal, .. } => marginal,
            _ => unreachable!("just marginalized"),
        };
        self.log_weight += marginal.log_pdf(&v)?;
        self.graph.realize(&x, v)
    }

    fn factor(&mut self, w: f64) -> Result<()> {
        self.log_weight += w;
        Ok(())
    }

    fn force(&mut self, v: Value) -> Result<Value> {
        self.force_value(&v)
    }

    fn symbolic_op(&mut self, op: Op, arg: Value) -> Result<Value> {
        let arg = self.resolve(&arg)?;
        if !arg.has_sym() {
            return ops::apply(op, &arg);
        }
        if op.is_structural() {
            let arg = self.force_value(&arg)?;
            return ops::apply(op, &arg);
        }
        let args = ops::args(op, &arg)?;
        if op == Op::Get && matches!(args[0], Value::Tuple(_)) {
            let i = self.force_value(&args[1])?;
            return ops::apply(op, &Value::pair(args[0].clone(), i));
        }
        use Op::*;
        match op {
            Gaussian | MvGaussian | Bernoulli => self.dist_term(op, args),
            Add | Sub | Mul | Div | Neg => self.arith(op, args),
            VAdd | VSub | MatMul | VecGet | Get => self.vector_op(op, args),
            Lt | Le | Gt | Ge | Eq | Ne | And | Or | Not | Exp | Log | Sqrt | Abs | Sin | Cos | Pow | Min | Max
            | FloatOfInt | IntOfFloat => Ok(Value::sym(SymExpr::App(op, args))),
            _ => self.apply_forced(op, &args),
        }
    }

    fn context(&self) -> u64 {
        self.context
    }
}

/// The distribution reported for a particle's output.
pub fn output_distribution(h: &mut DsHandler<'_>, v: &Value) -> Result<(Distribution, bool)> {
    match crate::ds::graph::distribution_of(v) {
        Ok(d) => Ok((d, false)),
        Err(crate::error::Error::NoClosedForm) => {
            let forced = h.force_value(v)?;
            Ok((Distribution::Dirac(forced), true))
        }
        Err(e) => Err(e),
    }
}
