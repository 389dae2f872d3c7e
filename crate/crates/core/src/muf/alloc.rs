//! Initial states.

use std::collections::HashMap;
use std::sync::Arc;

use crate::frontend::ast::{Expr, ExprKind, Literal};
use crate::infer::Cloud;
use crate::names::Name;
use crate::value::Value;

/// Default particle count of an `infer` written without one.
pub const DEFAULT_PARTICLES: u32 = 100;

pub fn literal(l: &Literal) -> Value {
    match l {
        Literal::Nil => Value::Nil,
        Literal::Unit => Value::Unit,
        Literal::Bool(b) => Value::Bool(*b),
        Literal::Int(n) => Value::Int(*n),
        Literal::Float(x) => Value::Float(*x),
    }
}

/// Value of an `init` constant (a literal or a tuple of literals).
pub fn const_value(e: &Expr) -> Value {
    match &e.kind {
        ExprKind::Const(l) => literal(l),
        ExprKind::Tuple(es) => Value::tuple(es.iter().map(const_value).collect()),
        _ => panic!("init values are constants after desugaring"),
    }
}

/// The initial state of an expression; `defs` holds the initial states of
/// the nodes it may call.
pub fn allocate(e: &Expr, defs: &HashMap<Name, Value>) -> Value {
    match &e.kind {
        ExprKind::Const(_) | ExprKind::Var(_) | ExprKind::Last(_) => Value::Unit,
        ExprKind::Tuple(es) => Value::tuple(es.iter().map(|e| allocate(e, defs)).collect()),
        ExprKind::OpApp(_, a) | ExprKind::Sample(a) | ExprKind::Factor(a) => allocate(a, defs),
        ExprKind::Call(f, a) => {
            let init = defs.get(f).cloned().expect("callee compiled before caller");
            Value::pair(init, allocate(a, defs))
        }
        ExprKind::WhereRec { body, inits, eqs } => Value::tuple(vec![
            Value::tuple(inits.iter().map(|i| const_value(&i.value)).collect()),
            Value::tuple(eqs.iter().map(|q| allocate(&q.expr, defs)).collect()),
            allocate(body, defs),
        ]),
        ExprKind::Present { cond, then_, else_ } => Value::tuple(vec![
            allocate(cond, defs),
            allocate(then_, defs),
            allocate(else_, defs),
        ]),
        ExprKind::Reset { body, cond } => {
            let b = allocate(body, defs);
            Value::tuple(vec![b.clone(), b, allocate(cond, defs)])
        }
        ExprKind::Observe(a, b) => Value::pair(allocate(a, defs), allocate(b, defs)),
        ExprKind::Infer(n, body) => Value::Cloud(Arc::new(Cloud::initial(
            allocate(body, defs),
            n.unwrap_or(DEFAULT_PARTICLES) as usize,
        ))),
        ExprKind::Pre(_) | ExprKind::Arrow(..) | ExprKind::If(..) | ExprKind::Apply(..) => {
            panic!("surface construct left after desugaring")
        }
    }
}
