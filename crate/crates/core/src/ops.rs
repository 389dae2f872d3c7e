//! Built-in operators and their concrete semantics.

use std::fmt;

use nalgebra::DVector;

use crate::bench::lqr;
use crate::dist::{self, Distribution};
use crate::error::{eval_err, Result};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Not,
    If,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Pow,
    Min,
    Max,
    FloatOfInt,
    IntOfFloat,
    Fst,
    Snd,
    /// Projection on the given tuple component (introduced for tuple patterns).
    Nth(usize),
    Get,
    VAdd,
    VSub,
    MatMul,
    VecGet,
    Lqr,
    Gaussian,
    Beta,
    Bernoulli,
    Poisson,
    Dirac,
    MvGaussian,
    UniformInt,
    Iid,
    Mean,
    Variance,
    Eval,
}

const NAMED: &[(&str, Op)] = &[
    ("exp", Op::Exp),
    ("log", Op::Log),
    ("sqrt", Op::Sqrt),
    ("abs", Op::Abs),
    ("sin", Op::Sin),
    ("cos", Op::Cos),
    ("pow", Op::Pow),
    ("min", Op::Min),
    ("max", Op::Max),
    ("float_of_int", Op::FloatOfInt),
    ("float", Op::FloatOfInt),
    ("int_of_float", Op::IntOfFloat),
    ("truncate", Op::IntOfFloat),
    ("fst", Op::Fst),
    ("snd", Op::Snd),
    ("get", Op::Get),
    ("vec_get", Op::VecGet),
    ("lqr", Op::Lqr),
    ("gaussian", Op::Gaussian),
    ("beta", Op::Beta),
    ("bernoulli", Op::Bernoulli),
    ("poisson", Op::Poisson),
    ("dirac", Op::Dirac),
    ("mv_gaussian", Op::MvGaussian),
    ("uniform_int", Op::UniformInt),
    ("iid", Op::Iid),
    ("mean", Op::Mean),
    ("variance", Op::Variance),
    ("eval", Op::Eval),
    ("not", Op::Not),
];

impl Op {
    /// Operators callable by name with function-application syntax.
    pub fn from_name(name: &str) -> Option<Op> {
        NAMED.iter().find(|(n, _)| *n == name).map(|(_, op)| *op)
    }

    pub fn arity(self) -> usize {
        use Op::*;
        match self {
            Neg | Not | Exp | Log | Sqrt | Abs | Sin | Cos | FloatOfInt | IntOfFloat | Fst | Snd | Nth(_) | Bernoulli
            | Poisson | Dirac | Mean | Variance | Eval => 1,
            If | Lqr => 3,
            _ => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        use Op::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Neg => "~-",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Eq => "=",
            Ne => "<>",
            And => "&&",
            Or => "||",
            If => "if",
            VAdd => "+@",
            VSub => "-@",
            MatMul => "*@",
            Nth(_) => "nth",
            other => NAMED.iter().find(|(_, op)| *op == other).map(|(n, _)| *n).unwrap_or("?"),
        }
    }

    pub fn is_infix(self) -> bool {
        use Op::*;
        matches!(
            self,
            Add | Sub | Mul | Div | Lt | Le | Gt | Ge | Eq | Ne | And | Or | VAdd | VSub | MatMul
        )
    }

    /// Operators that only rearrange their argument and never inspect symbolic leaves.
    pub fn is_structural(self) -> bool {
        matches!(self, Op::Fst | Op::Snd | Op::Nth(_))
    }

    pub fn is_dist_constructor(self) -> bool {
        use Op::*;
        matches!(self, Gaussian | Beta | Bernoulli | Poisson | Dirac | MvGaussian | UniformInt | Iid)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Splits an operator argument into its `arity` components.
pub fn args(op: Op, arg: &Value) -> Result<Vec<Value>> {
    let n = op.arity();
    if n == 1 {
        return Ok(vec![arg.clone()]);
    }
    let xs = arg.items()?;
    if xs.len() != n {
        return eval_err(format!("`{}` expects {} arguments, got {}", op, n, xs.len()));
    }
    Ok(xs.to_vec())
}

fn num2(op: Op, a: &Value, b: &Value, fi: fn(i64, i64) -> Option<i64>, ff: fn(f64, f64) -> f64) -> Result<Value> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => match fi(*x, *y) {
            Some(r) => Ok(Value::Int(r)),
            None => eval_err(format!("integer fault in `{}` ({} and {})", op, x, y)),
        },
        _ => Ok(Value::Float(ff(a.as_f64()?, b.as_f64()?))),
    }
}

fn compare(op: Op, a: &Value, b: &Value) -> Result<bool> {
    use std::cmp::Ordering;
    let ord = match (a, b) {
        (Value::Int(x), Value::Int(y)) => x.cmp(y),
        (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
        _ => {
            let (x, y) = (a.as_f64()?, b.as_f64()?);
            match x.partial_cmp(&y) {
                Some(o) => o,
                None => return Ok(false),
            }
        }
    };
    Ok(match op {
        Op::Lt => ord == Ordering::Less,
        Op::Le => ord != Ordering::Greater,
        Op::Gt => ord == Ordering::Greater,
        _ => ord != Ordering::Less,
    })
}

fn math(x: &Value, f: fn(f64) -> f64) -> Result<Value> {
    Ok(Value::Float(f(x.as_f64()?)))
}

fn index(i: &Value, len: usize) -> Result<usize> {
    let k = i.as_int()?;
    if k < 0 || k as usize >= len {
        return eval_err(format!("index {} out of bounds for length {}", k, len));
    }
    Ok(k as usize)
}

/// Applies an operator to a concrete argument (a tuple when the arity exceeds one).
pub fn apply(op: Op, arg: &Value) -> Result<Value> {
    use Op::*;
    let a = args(op, arg)?;
    match op {
        Add => num2(op, &a[0], &a[1], i64::checked_add, |x, y| x + y),
        Sub => num2(op, &a[0], &a[1], i64::checked_sub, |x, y| x - y),
        Mul => num2(op, &a[0], &a[1], i64::checked_mul, |x, y| x * y),
        Div => num2(op, &a[0], &a[1], i64::checked_div, |x, y| x / y),
        Neg => match &a[0] {
            Value::Int(n) => Ok(Value::Int(-n)),
            v => Ok(Value::Float(-v.as_f64()?)),
        },
        Lt | Le | Gt | Ge => Ok(Value::Bool(compare(op, &a[0], &a[1])?)),
        Eq => Ok(Value::Bool(a[0] == a[1])),
        Ne => Ok(Value::Bool(a[0] != a[1])),
        And => Ok(Value::Bool(a[0].as_bool()? && a[1].as_bool()?)),
        Or => Ok(Value::Bool(a[0].as_bool()? || a[1].as_bool()?)),
        Not => Ok(Value::Bool(!a[0].as_bool()?)),
        If => Ok(if a[0].as_bool()? { a[1].clone() } else { a[2].clone() }),
        Exp => math(&a[0], f64::exp),
        Log => math(&a[0], f64::ln),
        Sqrt => math(&a[0], f64::sqrt),
        Abs => match &a[0] {
            Value::Int(n) => Ok(Value::Int(n.abs())),
            v => math(v, f64::abs),
        },
        Sin => math(&a[0], f64::sin),
        Cos => math(&a[0], f64::cos),
        Pow => Ok(Value::Float(a[0].as_f64()?.powf(a[1].as_f64()?))),
        Min | Max => {
            let less = compare(Lt, &a[0], &a[1])?;
            let pick_first = if op == Min { less } else { !less };
            Ok(if pick_first { a[0].clone() } else { a[1].clone() })
        }
        FloatOfInt => Ok(Value::Float(a[0].as_f64()?)),
        IntOfFloat => Ok(Value::Int(a[0].as_f64()?.trunc() as i64)),
        Fst | Snd => {
            let xs = a[0].items()?;
            if xs.len() != 2 {
                return eval_err(format!("`{}` expects a pair", op));
            }
            Ok(xs[if op == Fst { 0 } else { 1 }].clone())
        }
        Nth(k) => {
            let xs = a[0].items()?;
            match xs.get(k) {
                Some(x) => Ok(x.clone()),
                None => eval_err(format!("projection {} of a {}-tuple", k, xs.len())),
            }
        }
        Get => match &a[0] {
            Value::Tuple(xs) => Ok(xs[index(&a[1], xs.len())?].clone()),
            Value::Vector(v) => Ok(Value::Float(v[index(&a[1], v.len())?])),
            other => eval_err(format!("`get` on a {}", other.type_name())),
        },
        VecGet => {
            let v = a[0].as_vector()?;
            Ok(Value::Float(v[index(&a[1], v.len())?]))
        }
        VAdd | VSub => {
            let sign = if op == VAdd { 1.0 } else { -1.0 };
            match (&a[0], &a[1]) {
                (Value::Vector(x), Value::Vector(y)) if x.len() == y.len() => Ok(Value::vector(&**x + &**y * sign)),
                (Value::Matrix(x), Value::Matrix(y)) if x.shape() == y.shape() => {
                    Ok(Value::matrix(&**x + &**y * sign))
                }
                _ => eval_err(format!("`{}` on mismatched operands", op)),
            }
        }
        MatMul => {
            let m = a[0].as_matrix()?;
            match &a[1] {
                Value::Vector(v) if m.ncols() == v.len() => Ok(Value::vector(m * &**v)),
                Value::Matrix(n) if m.ncols() == n.nrows() => Ok(Value::matrix(m * &**n)),
                _ => eval_err("`*@` on mismatched operands"),
            }
        }
        Lqr => {
            let u = lqr::command(a[0].as_matrix()?, a[1].as_matrix()?, a[2].as_vector()?)?;
            Ok(Value::vector(u))
        }
        Gaussian => Ok(Value::dist(dist::gaussian(a[0].as_f64()?, a[1].as_f64()?)?)),
        Beta => Ok(Value::dist(dist::beta(a[0].as_f64()?, a[1].as_f64()?)?)),
        Bernoulli => Ok(Value::dist(dist::bernoulli(a[0].as_f64()?)?)),
        Poisson => Ok(Value::dist(dist::poisson(a[0].as_f64()?)?)),
        Dirac => Ok(Value::dist(Distribution::Dirac(a[0].clone()))),
        MvGaussian => Ok(Value::dist(dist::mv_gaussian(
            a[0].as_vector()?.clone(),
            a[1].as_matrix()?.clone(),
        )?)),
        UniformInt => Ok(Value::dist(dist::uniform_int(a[0].as_int()?, a[1].as_int()?)?)),
        Iid => {
            let n = a[1].as_int()?;
            if n < 0 {
                return eval_err("iid with a negative count");
            }
            Ok(Value::dist(Distribution::Product(vec![a[0].as_dist()?.clone(); n as usize])))
        }
        Mean => a[0].as_dist()?.mean(),
        Variance => a[0].as_dist()?.variance(),
        Eval => Ok(a[0].clone()),
    }
}

/// Convenience for building vectors in tests and benchmark environments.
pub fn vector(xs: &[f64]) -> Value {
    Value::vector(DVector::from_column_slice(xs))
}
