//! The transition-function IR.

use std::collections::HashMap;

use crate::frontend::ast::DeclKind;
use crate::names::Name;
use crate::ops::Op;
use crate::value::Value;

#[derive(Clone, Debug, PartialEq)]
pub enum MufPattern {
    Var(Name),
    Wild,
    Tuple(Vec<MufPattern>),
}

impl MufPattern {
    pub fn tuple(ps: Vec<MufPattern>) -> MufPattern {
        if ps.is_empty() {
            MufPattern::Wild
        } else {
            MufPattern::Tuple(ps)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MufTerm {
    Const(Value),
    Var(Name),
    Tuple(Vec<MufTerm>),
    OpApp(Op, Box<MufTerm>),
    /// The function is a node step (`Var` naming a definition) or a `Fun`.
    App(Box<MufTerm>, Box<MufTerm>),
    If(Box<MufTerm>, Box<MufTerm>, Box<MufTerm>),
    Let(MufPattern, Box<MufTerm>, Box<MufTerm>),
    Fun(MufPattern, Box<MufTerm>),
    Sample(Box<MufTerm>),
    Observe(Box<MufTerm>, Box<MufTerm>),
    Factor(Box<MufTerm>),
    /// `infer(model, states)`: `model` is a `Fun`; `site` identifies the
    /// `infer` occurrence in the program.
    Infer {
        site: u32,
        model: Box<MufTerm>,
        state: Box<MufTerm>,
    },
}

impl MufTerm {
    pub fn tuple(ts: Vec<MufTerm>) -> MufTerm {
        if ts.is_empty() {
            MufTerm::Const(Value::Unit)
        } else {
            MufTerm::Tuple(ts)
        }
    }

    pub fn pair(a: MufTerm, b: MufTerm) -> MufTerm {
        MufTerm::Tuple(vec![a, b])
    }

    pub fn let_(p: MufPattern, bound: MufTerm, body: MufTerm) -> MufTerm {
        MufTerm::Let(p, Box::new(bound), Box::new(body))
    }
}

/// A compiled node: `step` is `fun (state, param) -> (result, state')`.
#[derive(Clone, Debug)]
pub struct MufDef {
    pub kind: DeclKind,
    pub init: Value,
    pub step: MufTerm,
}

#[derive(Clone, Debug, Default)]
pub struct MufProgram {
    pub defs: HashMap<Name, MufDef>,
    /// Declaration order, for printing.
    pub order: Vec<Name>,
    /// Top-level constants, evaluated once in order.
    pub consts: Vec<(Name, MufTerm, Value)>,
}
