//! Runtime values. Program values and the state trees threaded through
//! transition functions share this one universe.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dist::Distribution;
use crate::ds::SymExpr;
use crate::error::{eval_err, Result};
use crate::infer::Cloud;

#[derive(Clone)]
pub enum Value {
    /// Placeholder for a memory that is never read (`pre` at the first instant).
    Nil,
    Unit,
    Bool(bool),
    Int(i64),
    Float(f64),
    Vector(Arc<DVector<f64>>),
    Matrix(Arc<DMatrix<f64>>),
    Tuple(Arc<[Value]>),
    Dist(Arc<Distribution>),
    /// A delayed-sampling term; only appears inside particles of a DS engine.
    Sym(Arc<SymExpr>),
    /// The state of an `infer` instance: its weighted cloud of model states.
    Cloud(Arc<Cloud>),
}

impl Value {
    pub fn tuple(items: Vec<Value>) -> Value {
        if items.is_empty() {
            Value::Unit
        } else {
            Value::Tuple(items.into())
        }
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Tuple(Arc::from([a, b]))
    }

    pub fn vector(v: DVector<f64>) -> Value {
        Value::Vector(Arc::new(v))
    }

    pub fn matrix(m: DMatrix<f64>) -> Value {
        Value::Matrix(Arc::new(m))
    }

    pub fn dist(d: Distribution) -> Value {
        Value::Dist(Arc::new(d))
    }

    pub fn sym(s: SymExpr) -> Value {
        Value::Sym(Arc::new(s))
    }

    pub fn as_f64(&self) -> Result<f64> {
        match self {
            Value::Float(x) => Ok(*x),
            Value::Int(n) => Ok(*n as f64),
            _ => eval_err(format!("expected a number, found {}", self.type_name())),
        }
    }

    pub fn as_bool(&self) -> Result<bool> {
        match self {
            Value::Bool(b) => Ok(*b),
            _ => eval_err(format!("expected a boolean, found {}", self.type_name())),
        }
    }

    pub fn as_int(&self) -> Result<i64> {
        match self {
            Value::Int(n) => Ok(*n),
            _ => eval_err(format!("expected an integer, found {}", self.type_name())),
        }
    }

    pub fn as_vector(&self) -> Result<&DVector<f64>> {
        match self {
            Value::Vector(v) => Ok(v),
            _ => eval_err(format!("expected a vector, found {}", self.type_name())),
        }
    }

    pub fn as_matrix(&self) -> Result<&DMatrix<f64>> {
        match self {
            Value::Matrix(m) => Ok(m),
            _ => eval_err(format!("expected a matrix, found {}", self.type_name())),
        }
    }

    pub fn as_dist(&self) -> Result<&Distribution> {
        match self {
            Value::Dist(d) => Ok(d),
            _ => eval_err(format!("expected a distribution, found {}", self.type_name())),
        }
    }

    pub fn items(&self) -> Result<&[Value]> {
        match self {
            Value::Tuple(xs) => Ok(xs),
            Value::Unit => Ok(&[]),
            _ => eval_err(format!("expected a tuple, found {}", self.type_name())),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Nil => "nil",
            Value::Unit => "unit",
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Vector(_) => "vector",
            Value::Matrix(_) => "matrix",
            Value::Tuple(_) => "tuple",
            Value::Dist(_) => "distribution",
            Value::Sym(_) => "symbolic term",
            Value::Cloud(_) => "particle cloud",
        }
    }

    /// True when the value mentions a delayed-sampling term anywhere.
    pub fn has_sym(&self) -> bool {
        match self {
            Value::Sym(_) => true,
            Value::Tuple(xs) => xs.iter().any(Value::has_sym),
            _ => false,
        }
    }

    /// Values whose support is countable, for which a Dirac has a mass function.
    pub fn is_discrete(&self) -> bool {
        match self {
            Value::Unit | Value::Bool(_) | Value::Int(_) | Value::Nil => true,
            Value::Tuple(xs) => xs.iter().all(Value::is_discrete),
            _ => false,
        }
    }

    /// Same tree skeleton: tuple arity and nesting agree, leaves are not compared.
    pub fn same_shape(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Tuple(a), Value::Tuple(b)) => {
                a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.same_shape(y))
            }
            (Value::Tuple(_), _) | (_, Value::Tuple(_)) => false,
            (Value::Unit, Value::Unit) => true,
            (Value::Unit, _) | (_, Value::Unit) => false,
            _ => true,
        }
    }

    /// An exact textual key (floats by bit pattern) used to group equal values.
    pub fn key(&self) -> String {
        let mut s = String::new();
        self.write_key(&mut s);
        s
    }

    fn write_key(&self, out: &mut String) {
        match self {
            Value::Nil => out.push('N'),
            Value::Unit => out.push('U'),
            Value::Bool(b) => out.push(if *b { 'T' } else { 'F' }),
            Value::Int(n) => {
                let _ = write!(out, "i{}", n);
            }
            Value::Float(x) => {
                let _ = write!(out, "f{:x}", x.to_bits());
            }
            Value::Vector(v) => {
                out.push('[');
                for x in v.iter() {
                    let _ = write!(out, "{:x},", x.to_bits());
                }
                out.push(']');
            }
            Value::Matrix(m) => {
                let _ = write!(out, "M{}x{}[", m.nrows(), m.ncols());
                for x in m.iter() {
                    let _ = write!(out, "{:x},", x.to_bits());
                }
                out.push(']');
            }
            Value::Tuple(xs) => {
                out.push('(');
                for x in xs.iter() {
                    x.write_key(out);
                    out.push(',');
                }
                out.push(')');
            }
            Value::Dist(d) => {
                let _ = write!(out, "D{:?}", d);
            }
            Value::Sym(s) => {
                let _ = write!(out, "S{:p}", Arc::as_ptr(s));
            }
            Value::Cloud(c) => {
                let _ = write!(out, "C{:p}", Arc::as_ptr(c));
            }
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Nil, Value::Nil) | (Value::Unit, Value::Unit) => true,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a == b,
            (Value::Vector(a), Value::Vector(b)) => a == b,
            (Value::Matrix(a), Value::Matrix(b)) => a == b,
            (Value::Tuple(a), Value::Tuple(b)) => a == b,
            (Value::Dist(a), Value::Dist(b)) => a == b,
            (Value::Sym(a), Value::Sym(b)) => Arc::ptr_eq(a, b),
            (Value::Cloud(a), Value::Cloud(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nil => write!(f, "nil"),
            Value::Unit => write!(f, "()"),
            Value::Bool(b) => write!(f, "{}", b),
            Value::Int(n) => write!(f, "{}", n),
            Value::Float(x) => write!(f, "{:?}", x),
            Value::Vector(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{:?}", x)?;
                }
                write!(f, "]")
            }
            Value::Matrix(m) => {
                write!(f, "[")?;
                for r in 0..m.nrows() {
                    if r > 0 {
                        write!(f, " | ")?;
                    }
                    for c in 0..m.ncols() {
                        if c > 0 {
                            write!(f, "; ")?;
                        }
                        write!(f, "{:?}", m[(r, c)])?;
                    }
                }
                write!(f, "]")
            }
            Value::Tuple(xs) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", x)?;
                }
                write!(f, ")")
            }
            Value::Dist(d) => write!(f, "{:?}", d),
            Value::Sym(s) => write!(f, "{:?}", s),
            Value::Cloud(c) => write!(f, "<cloud of {} particles>", c.particles.len()),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Value {
        Value::Float(x)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Value {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Value {
        Value::Int(n)
    }
}
