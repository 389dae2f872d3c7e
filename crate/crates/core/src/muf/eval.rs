//! Evaluation of transition functions.
//!
//! One evaluator serves every engine: probabilistic constructs and
//! operations on symbolic values are delegated to a [`Handler`].

use std::collections::HashMap;
use std::sync::atomic::AtomicI64;
use std::sync::{Arc, Mutex};

use crate::error::{eval_err, Result};
use crate::infer::{self, EngineConfig, RunStats};
use crate::muf::term::*;
use crate::names::Name;
use crate::ops::{self, Op};
use crate::value::Value;

/// How the evaluator runs `sample`, `observe` and `factor`, and what it does
/// with symbolic values.
pub trait Handler {
    fn sample(&mut self, d: Value) -> Result<Value>;
    fn observe(&mut self, d: Value, v: Value) -> Result<()>;
    fn factor(&mut self, w: f64) -> Result<()>;
    /// A concrete value for `v` (delayed sampling draws its random variables).
    fn force(&mut self, v: Value) -> Result<Value>;
    fn symbolic_op(&mut self, op: Op, arg: Value) -> Result<Value>;
    /// Identifies the enclosing particle, so that nested `infer`s draw from
    /// their own random streams. Zero at top level.
    fn context(&self) -> u64;
}

/// The handler of deterministic code: probabilistic constructs cannot occur.
pub struct Deterministic;

impl Handler for Deterministic {
    fn sample(&mut self, _: Value) -> Result<Value> {
        unreachable!("kind checking rejects `sample` outside `infer`")
    }

    fn observe(&mut self, _: Value, _: Value) -> Result<()> {
        unreachable!("kind checking rejects `observe` outside `infer`")
    }

    fn factor(&mut self, _: f64) -> Result<()> {
        unreachable!("kind checking rejects `factor` outside `infer`")
    }

    fn force(&mut self, v: Value) -> Result<Value> {
        Ok(v)
    }

    fn symbolic_op(&mut self, op: Op, _: Value) -> Result<Value> {
        eval_err(format!("symbolic argument to `{}` in deterministic code", op))
    }

    fn context(&self) -> u64 {
        0
    }
}

/// Everything shared by the evaluation of one program.
pub struct Runtime {
    pub program: MufProgram,
    pub globals: HashMap<Name, Value>,
    pub config: EngineConfig,
    pub stats: Mutex<RunStats>,
    /// Delayed-sampling nodes currently alive.
    pub live_nodes: Arc<AtomicI64>,
}

impl Runtime {
    pub fn new(program: MufProgram, globals: HashMap<Name, Value>, config: EngineConfig) -> Result<Runtime> {
        let mut rt = Runtime {
            program,
            globals,
            config,
            stats: Mutex::new(RunStats::default()),
            live_nodes: Arc::new(AtomicI64::new(0)),
        };
        let consts = rt.program.consts.clone();
        for (name, term, init) in consts {
            let mut env = Env::default();
            let out = apply_fun(&rt, &term, init, &mut env, &mut Deterministic)?;
            let (v, _) = split_pair(out)?;
            rt.globals.insert(name, v);
        }
        Ok(rt)
    }

    pub fn live_node_count(&self) -> i64 {
        self.live_nodes.load(std::sync::atomic::Ordering::SeqCst)
    }
}

pub(crate) fn apply_fun(
    rt: &Runtime,
    term: &MufTerm,
    arg: Value,
    env: &mut Env,
    h: &mut dyn Handler,
) -> Result<Value> {
    match term {
        MufTerm::Fun(p, body) => {
            let mark = env.len();
            env.bind(p, arg)?;
            let r = eval(rt, body, env, h);
            env.truncate(mark);
            r
        }
        _ => eval_err("expected a function"),
    }
}

#[derive(Clone, Debug, Default)]
pub struct Env {
    vars: Vec<(Name, Value)>,
}

impl Env {
    pub fn new() -> Env {
        Env { vars: Vec::with_capacity(64) }
    }

    /// A copy with room to grow.
    pub fn fork(&self) -> Env {
        let mut vars = Vec::with_capacity(self.vars.len() + 64);
        vars.extend(self.vars.iter().cloned());
        Env { vars }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn truncate(&mut self, n: usize) {
        self.vars.truncate(n);
    }

    pub fn push(&mut self, x: Name, v: Value) {
        self.vars.push((x, v));
    }

    pub fn get(&self, x: Name) -> Option<&Value> {
        self.vars.iter().rev().find(|(n, _)| *n == x).map(|(_, v)| v)
    }

    pub fn bind(&mut self, p: &MufPattern, v: Value) -> Result<()> {
        match p {
            MufPattern::Var(x) => self.vars.push((*x, v)),
            MufPattern::Wild => {}
            MufPattern::Tuple(ps) => match &v {
                Value::Tuple(xs) if xs.len() == ps.len() => {
                    for (p, x) in ps.iter().zip(xs.iter()) {
                        self.bind(p, x.clone())?;
                    }
                }
                Value::Nil => {
                    for p in ps {
                        self.bind(p, Value::Nil)?;
                    }
                }
                _ => {
                    return eval_err(format!(
                        "state shape mismatch: a {}-tuple pattern against {}",
                        ps.len(),
                        v
                    ))
                }
            },
        }
        Ok(())
    }
}

pub fn split_pair(v: Value) -> Result<(Value, Value)> {
    match v {
        Value::Tuple(xs) if xs.len() == 2 => Ok((xs[0].clone(), xs[1].clone())),
        other => eval_err(format!("expected a (value, state) pair, found {}", other)),
    }
}

// `nil` is the memory of a `pre` before its first value; operators propagate it.
fn mentions_nil(v: &Value) -> bool {
    match v {
        Value::Nil => true,
        Value::Tuple(xs) => xs.iter().any(|x| matches!(x, Value::Nil)),
        _ => false,
    }
}

/// Applies an operator, delegating symbolic arguments to the handler.
pub fn apply_op(op: Op, arg: Value, h: &mut dyn Handler) -> Result<Value> {
    if op == Op::If {
        let xs = arg.items()?;
        if xs.len() != 3 {
            return eval_err("`if` expects three arguments");
        }
        let c = if matches!(xs[0], Value::Sym(_)) { h.force(xs[0].clone())? } else { xs[0].clone() };
        return match c {
            Value::Nil => Ok(Value::Nil),
            c => Ok(if c.as_bool()? { xs[1].clone() } else { xs[2].clone() }),
        };
    }
    if op.is_structural() {
        return match &arg {
            Value::Nil => Ok(Value::Nil),
            Value::Sym(_) => h.symbolic_op(op, arg),
            _ => ops::apply(op, &arg),
        };
    }
    if op == Op::Eval {
        return h.force(arg);
    }
    if mentions_nil(&arg) {
        return Ok(Value::Nil);
    }
    if arg.has_sym() {
        return h.symbolic_op(op, arg);
    }
    ops::apply(op, &arg)
}

pub fn eval(rt: &Runtime, t: &MufTerm, env: &mut Env, h: &mut dyn Handler) -> Result<Value> {
    match t {
        MufTerm::Const(v) => Ok(v.clone()),
        MufTerm::Var(x) => match env.get(*x) {
            Some(v) => Ok(v.clone()),
            None => match rt.globals.get(x) {
                Some(v) => Ok(v.clone()),
                None => eval_err(format!("unbound variable `{}`", x)),
            },
        },
        MufTerm::Tuple(ts) if ts.len() == 2 => {
            let a = eval(rt, &ts[0], env, h)?;
            let b = eval(rt, &ts[1], env, h)?;
            Ok(Value::pair(a, b))
        }
        MufTerm::Tuple(ts) => {
            let mut xs = Vec::with_capacity(ts.len());
            for t in ts {
                xs.push(eval(rt, t, env, h)?);
            }
            Ok(Value::Tuple(xs.into()))
        }
        MufTerm::OpApp(op, a) => {
            let v = eval(rt, a, env, h)?;
            apply_op(*op, v, h)
        }
        MufTerm::App(f, a) => {
            let arg = eval(rt, a, env, h)?;
            match &**f {
                MufTerm::Var(name) => {
                    let def = match rt.program.defs.get(name) {
                        Some(d) => d,
                        None => return eval_err(format!("unknown node `{}`", name)),
                    };
                    // Node bodies only see their own parameters and the globals.
                    let mut inner = Env::new();
                    apply_fun(rt, &def.step, arg, &mut inner, h)
                }
                fun @ MufTerm::Fun(..) => apply_fun(rt, fun, arg, env, h),
                _ => eval_err("application of a non-function"),
            }
        }
        MufTerm::If(c, a, b) => {
            let c = eval(rt, c, env, h)?;
            let c = if matches!(c, Value::Sym(_)) { h.force(c)? } else { c };
            if c.as_bool()? {
                eval(rt, a, env, h)
            } else {
                eval(rt, b, env, h)
            }
        }
        MufTerm::Let(p, bound, body) => {
            let mark = env.len();
            match (p, &**bound) {
                // Destructuring a tuple literal binds its components without
                // building the tuple. Components still see the outer scope only.
                (MufPattern::Tuple(ps), MufTerm::Tuple(ts)) if ps.len() == 2 && ts.len() == 2 => {
                    let a = eval(rt, &ts[0], env, h)?;
                    let b = eval(rt, &ts[1], env, h)?;
                    env.bind(&ps[0], a)?;
                    env.bind(&ps[1], b)?;
                }
                (MufPattern::Tuple(ps), MufTerm::Tuple(ts)) if ps.len() == ts.len() => {
                    let mut xs = Vec::with_capacity(ts.len());
                    for t in ts {
                        xs.push(eval(rt, t, env, h)?);
                    }
                    for (p, x) in ps.iter().zip(xs) {
                        env.bind(p, x)?;
                    }
                }
                _ => {
                    let v = eval(rt, bound, env, h)?;
                    env.bind(p, v)?;
                }
            }
            let r = eval(rt, body, env, h);
            env.truncate(mark);
            r
        }
        // A function value is only ever applied directly.
        MufTerm::Fun(..) => Ok(Value::Unit),
        MufTerm::Sample(d) => {
            let d = eval(rt, d, env, h)?;
            if matches!(d, Value::Nil) {
                return Ok(Value::Nil);
            }
            h.sample(d)
        }
        MufTerm::Observe(d, v) => {
            let d = eval(rt, d, env, h)?;
            let v = eval(rt, v, env, h)?;
            if matches!(d, Value::Nil) || mentions_nil(&v) {
                return Ok(Value::Unit);
            }
            h.observe(d, v)?;
            Ok(Value::Unit)
        }
        MufTerm::Factor(w) => {
            let w = eval(rt, w, env, h)?;
            if matches!(w, Value::Nil) {
                return Ok(Value::Unit);
            }
            let w = h.force(w)?.as_f64()?;
            h.factor(w)?;
            Ok(Value::Unit)
        }
        MufTerm::Infer { site, model, state } => {
            let st = eval(rt, state, env, h)?;
            let cloud = match st {
                Value::Cloud(c) => c,
                other => return eval_err(format!("infer state is a {}", other.type_name())),
            };
            let (d, next) = infer::engine::step(rt, *site, model, &cloud, env, h.context())?;
            Ok(Value::pair(d, Value::Cloud(Arc::new(next))))
        }
    }
}

/// Runs one step of a node: returns the output and the next state.
pub fn step_node(rt: &Runtime, node: Name, state: Value, input: Value, h: &mut dyn Handler) -> Result<(Value, Value)> {
    let def = match rt.program.defs.get(&node) {
        Some(d) => d,
        None => return eval_err(format!("unknown node `{}`", node)),
    };
    let mut env = Env::new();
    let out = apply_fun(rt, &def.step, Value::pair(state, input), &mut env, h)?;
    split_pair(out)
}
