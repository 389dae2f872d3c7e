//! Reference interpreter: runs kernel expressions directly as stream
//! transformers, threading the same state trees as the compiled code.

use std::collections::HashMap;

use crate::error::{eval_err, Result};
use crate::frontend::ast::*;
use crate::muf::alloc::{allocate, literal};
use crate::muf::eval::{apply_op, Deterministic, Env};
use crate::names::{last_name, Name};
use crate::value::Value;

pub struct Interp<'a> {
    nodes: HashMap<Name, &'a NodeDecl>,
    globals: &'a HashMap<Name, Value>,
    inits: HashMap<Name, Value>,
}

fn bind(env: &mut Env, p: &Pattern, v: Value) -> Result<()> {
    match p {
        Pattern::Var(x) => env.push(*x, v),
        Pattern::Wild | Pattern::Unit => {}
        Pattern::Tuple(ps) => {
            let xs = v.items()?;
            if xs.len() != ps.len() {
                return eval_err("tuple pattern of the wrong arity");
            }
            for (p, x) in ps.iter().zip(xs) {
                bind(env, p, x.clone())?;
            }
        }
    }
    Ok(())
}

fn components(s: &Value, n: usize) -> Result<Vec<Value>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let xs = s.items()?;
    if xs.len() != n {
        return eval_err(format!("state shape mismatch: expected {} components, found {}", n, xs.len()));
    }
    Ok(xs.to_vec())
}

impl<'a> Interp<'a> {
    /// `prog` must be desugared, checked and scheduled.
    pub fn new(prog: &'a Program, globals: &'a HashMap<Name, Value>) -> Interp<'a> {
        let mut inits = HashMap::new();
        let mut nodes = HashMap::new();
        for n in prog.nodes() {
            let init = allocate(&n.body, &inits);
            inits.insert(n.name, init);
            nodes.insert(n.name, n);
        }
        Interp { nodes, globals, inits }
    }

    pub fn init(&self, node: Name) -> Option<Value> {
        self.inits.get(&node).cloned()
    }

    /// One reaction of `node`: output and next state.
    pub fn step_node(&self, node: Name, state: &Value, input: Value) -> Result<(Value, Value)> {
        let decl = match self.nodes.get(&node) {
            Some(d) => *d,
            None => return eval_err(format!("unknown node `{}`", node)),
        };
        let mut env = Env::new();
        bind(&mut env, &decl.param, input)?;
        self.step(&decl.body, state, &mut env)
    }

    /// Runs `node` on an input stream from its initial state.
    pub fn run(&self, node: Name, inputs: &[Value]) -> Result<(Vec<Value>, Value)> {
        let mut state = match self.init(node) {
            Some(s) => s,
            None => return eval_err(format!("unknown node `{}`", node)),
        };
        let mut out = Vec::with_capacity(inputs.len());
        for x in inputs {
            let (v, s) = self.step_node(node, &state, x.clone())?;
            out.push(v);
            state = s;
        }
        Ok((out, state))
    }

    fn lookup(&self, env: &Env, x: Name) -> Result<Value> {
        match env.get(x).or_else(|| self.globals.get(&x)) {
            Some(v) => Ok(v.clone()),
            None => eval_err(format!("unbound variable `{}`", x)),
        }
    }

    pub fn step(&self, e: &Expr, s: &Value, env: &mut Env) -> Result<(Value, Value)> {
        match &e.kind {
            ExprKind::Const(l) => Ok((literal(l), s.clone())),
            ExprKind::Var(x) => Ok((self.lookup(env, *x)?, s.clone())),
            ExprKind::Last(x) => Ok((self.lookup(env, last_name(*x))?, s.clone())),
            ExprKind::Tuple(es) => {
                let ss = components(s, es.len())?;
                let mut vs = Vec::new();
                let mut outs = Vec::new();
                for (e, si) in es.iter().zip(&ss) {
                    let (v, so) = self.step(e, si, env)?;
                    vs.push(v);
                    outs.push(so);
                }
                Ok((Value::tuple(vs), Value::tuple(outs)))
            }
            ExprKind::OpApp(op, a) => {
                let (v, s2) = self.step(a, s, env)?;
                Ok((apply_op(*op, v, &mut Deterministic)?, s2))
            }
            ExprKind::Call(f, a) => {
                let ss = components(s, 2)?;
                let (v, sa) = self.step(a, &ss[1], env)?;
                let (r, sf) = self.step_node(*f, &ss[0], v)?;
                Ok((r, Value::pair(sf, sa)))
            }
            ExprKind::WhereRec { body, inits, eqs } => {
                let parts = components(s, 3)?;
                let memory = components(&parts[0], inits.len())?;
                let eq_states = components(&parts[1], eqs.len())?;
                let mark = env.len();
                for (i, m) in inits.iter().zip(memory) {
                    env.push(last_name(i.name), m);
                }
                let mut outs = Vec::new();
                for (q, si) in eqs.iter().zip(&eq_states) {
                    let (v, so) = self.step(&q.expr, si, env)?;
                    bind(env, &q.pat, v)?;
                    outs.push(so);
                }
                let (v, sb) = self.step(body, &parts[2], env)?;
                let mut next_memory = Vec::new();
                for i in inits {
                    next_memory.push(self.lookup(env, i.name)?);
                }
                env.truncate(mark);
                Ok((v, Value::tuple(vec![Value::tuple(next_memory), Value::tuple(outs), sb])))
            }
            ExprKind::Present { cond, then_, else_ } => {
                let parts = components(s, 3)?;
                let (c, sc) = self.step(cond, &parts[0], env)?;
                if c.as_bool()? {
                    let (v, st) = self.step(then_, &parts[1], env)?;
                    Ok((v, Value::tuple(vec![sc, st, parts[2].clone()])))
                } else {
                    let (v, se) = self.step(else_, &parts[2], env)?;
                    Ok((v, Value::tuple(vec![sc, parts[1].clone(), se])))
                }
            }
            ExprKind::Reset { body, cond } => {
                let parts = components(s, 3)?;
                let (c, sc) = self.step(cond, &parts[2], env)?;
                let from = if c.as_bool()? { &parts[0] } else { &parts[1] };
                let (v, sb) = self.step(body, from, env)?;
                Ok((v, Value::tuple(vec![parts[0].clone(), sb, sc])))
            }
            ExprKind::Sample(_) | ExprKind::Observe(..) | ExprKind::Factor(_) | ExprKind::Infer(..) => {
                eval_err("the reference interpreter only runs deterministic programs")
            }
            ExprKind::Pre(_) | ExprKind::Arrow(..) | ExprKind::If(..) | ExprKind::Apply(..) => {
                eval_err("surface construct left after desugaring")
            }
        }
    }
}
