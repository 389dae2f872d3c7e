//! Duplication of a particle's graph, and its textual dump.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::ds::node::{NodeRef, Status};
use crate::ds::sym::{value_nodes, SymExpr};
use crate::infer::{Cloud, Particle};
use crate::value::Value;

/// Copies the nodes reachable from some values, remapping handles so that
/// the copy shares nothing with the original.
#[derive(Default)]
pub struct Copier {
    seen: HashMap<usize, NodeRef>,
    // Back links of copied nodes, remapped once every node is copied.
    ups: Vec<(NodeRef, NodeRef)>,
}

impl Copier {
    pub fn new() -> Copier {
        Copier::default()
    }

    pub fn node(&mut self, n: &NodeRef) -> NodeRef {
        let key = Arc::as_ptr(&n.0) as usize;
        if let Some(c) = self.seen.get(&key) {
            return c.clone();
        }
        let (status, up) = {
            let cell = n.lock();
            (cell.status.clone(), cell.up.clone())
        };
        let status = match status {
            Status::Initialized { parent, cond } => Status::Initialized { parent: self.node(&parent), cond },
            Status::Marginalized { marginal, child } => Status::Marginalized {
                marginal,
                child: child.map(|(c, cond)| (self.node(&c), cond)),
            },
            Status::Realized(v) => Status::Realized(v),
        };
        let copy = NodeRef::new(n.family(), status, n.live_counter());
        self.seen.insert(key, copy.clone());
        if let Some(p) = up.and_then(|w| w.upgrade()) {
            self.ups.push((copy.clone(), NodeRef(p)));
        }
        copy
    }

    fn link_ups(&mut self) {
        while let Some((copy, p)) = self.ups.pop() {
            // A parent that nothing else reaches is not worth keeping.
            if let Some(q) = self.seen.get(&(Arc::as_ptr(&p.0) as usize)) {
                copy.lock().up = Some(q.downgrade());
            }
        }
    }

    fn sym(&mut self, e: &SymExpr) -> SymExpr {
        match e {
            SymExpr::Const(v) => SymExpr::Const(self.value_inner(v)),
            SymExpr::RVar(x) => SymExpr::RVar(self.node(x)),
            SymExpr::Affine { a, x, b } => SymExpr::Affine { a: *a, x: self.node(x), b: *b },
            SymExpr::AffineVec { m, x, b, scalar } => SymExpr::AffineVec {
                m: m.clone(),
                x: self.node(x),
                b: b.clone(),
                scalar: *scalar,
            },
            SymExpr::App(op, args) => SymExpr::App(*op, args.iter().map(|a| self.value_inner(a)).collect()),
        }
    }

    pub fn value(&mut self, v: &Value) -> Value {
        let out = self.value_inner(v);
        self.link_ups();
        out
    }

    fn value_inner(&mut self, v: &Value) -> Value {
        match v {
            Value::Sym(e) => Value::sym(self.sym(e)),
            Value::Tuple(xs) if needs_copy(v) => Value::Tuple(xs.iter().map(|x| self.value_inner(x)).collect()),
            Value::Cloud(c) if needs_copy(v) => Value::Cloud(Arc::new(Cloud {
                particles: c.particles.iter().map(|p| self.particle_inner(p)).collect(),
                step: c.step,
                n: c.n,
            })),
            _ => v.clone(),
        }
    }

    pub fn particle(&mut self, p: &Particle) -> Particle {
        let out = self.particle_inner(p);
        self.link_ups();
        out
    }

    fn particle_inner(&mut self, p: &Particle) -> Particle {
        Particle {
            state: self.value_inner(&p.state),
            log_weight: p.log_weight,
            registry: p.registry.iter().map(|n| self.node(n)).collect(),
        }
    }
}

/// True when duplicating the value must also duplicate graph nodes.
pub fn needs_copy(v: &Value) -> bool {
    match v {
        Value::Sym(_) => true,
        Value::Tuple(xs) => xs.iter().any(needs_copy),
        Value::Cloud(c) => c.particles.iter().any(|p| !p.registry.is_empty() || needs_copy(&p.state)),
        _ => false,
    }
}

/// Stable text of the graph reachable from a value. Nodes are numbered in
/// order of discovery, so the text does not depend on global node ids.
pub fn dump(v: &Value) -> String {
    let mut order: Vec<NodeRef> = Vec::new();
    value_nodes(v, &mut order);
    let mut i = 0;
    while i < order.len() {
        let n = order[i].clone();
        let next = match &n.lock().status {
            Status::Initialized { parent, .. } => Some(parent.clone()),
            Status::Marginalized { child: Some((c, _)), .. } => Some(c.clone()),
            _ => None,
        };
        if let Some(m) = next {
            if !order.iter().any(|x| x.ptr_eq(&m)) {
                order.push(m);
            }
        }
        i += 1;
    }
    let index = |m: &NodeRef| order.iter().position(|x| x.ptr_eq(m)).unwrap();
    let mut out = String::new();
    for (k, n) in order.iter().enumerate() {
        let _ = match n.status() {
            Status::Initialized { parent, cond } => {
                writeln!(out, "n{} initialized parent=n{} cond={:?}", k, index(&parent), cond)
            }
            Status::Marginalized { marginal, child } => match child {
                Some((c, _)) => writeln!(out, "n{} marginalized {:?} child=n{}", k, marginal, index(&c)),
                None => writeln!(out, "n{} marginalized {:?}", k, marginal),
            },
            Status::Realized(v) => writeln!(out, "n{} realized {}", k, v),
        };
    }
    out
}
