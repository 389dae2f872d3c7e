//! Rewrites surface sugar into the kernel.
//!
//! * `e1 -> e2` becomes `if last first then e1 else e2`, with one `first` flag
//!   per block (`init first = true and first = false`).
//! * `pre x`, for `x` defined in the current block, becomes `last x`; any other
//!   `pre e` introduces an equation `p = e` with `init p = nil` and becomes `last p`.
//! * `init x = e` with a non-constant `e` keeps `nil` as memory and reads
//!   `e` through `present last first -> e else last x` at the first instant.
//! * Tuple, `()` and `_` equation patterns bind fresh names.
//!
//! Present branches, reset bodies and infer bodies are blocks of their own,
//! so their `pre`/`->` only advance when that code runs.

use std::collections::HashSet;

use crate::frontend::ast::*;
use crate::names::{Fresh, Name};
use crate::ops::Op;

pub fn desugar(mut prog: Program) -> Program {
    let mut fresh = Fresh::new(program_names(&prog));
    for d in &mut prog.decls {
        match d {
            Decl::Node(n) => {
                let body = std::mem::replace(&mut n.body, dummy());
                n.body = scoped(body, &mut fresh);
            }
            Decl::Const(c) => {
                let body = std::mem::replace(&mut c.body, dummy());
                c.body = scoped(body, &mut fresh);
            }
        }
    }
    number_program(&mut prog);
    prog
}

fn dummy() -> Expr {
    Expr::new(Pos::default(), ExprKind::Const(Literal::Unit))
}

fn program_names(prog: &Program) -> HashSet<Name> {
    let mut out = HashSet::new();
    let mut pat = Vec::new();
    for d in &prog.decls {
        let body = match d {
            Decl::Node(n) => {
                out.insert(n.name);
                n.param.names(&mut pat);
                &n.body
            }
            Decl::Const(c) => {
                out.insert(c.name);
                &c.body
            }
        };
        body.walk(&mut |e| match &e.kind {
            ExprKind::Var(x) | ExprKind::Last(x) | ExprKind::Call(x, _) | ExprKind::Apply(x, _) => {
                out.insert(*x);
            }
            ExprKind::WhereRec { inits, eqs, .. } => {
                for i in inits {
                    out.insert(i.name);
                }
                let mut v = Vec::new();
                for eq in eqs {
                    eq.pat.names(&mut v);
                }
                out.extend(v);
            }
            _ => {}
        });
    }
    out.extend(pat);
    out
}

#[derive(Default)]
struct Scope {
    defined: HashSet<Name>,
    first: Option<Name>,
    inits: Vec<Init>,
    eqs: Vec<Equation>,
    /// Block variables read through `pre` that need a (nil) memory.
    needs_memory: Vec<Name>,
}

impl Scope {
    fn first_flag(&mut self, fresh: &mut Fresh, pos: Pos) -> Name {
        if let Some(f) = self.first {
            return f;
        }
        let f = fresh.name("first");
        self.first = Some(f);
        self.inits.insert(
            0,
            Init {
                name: f,
                value: Expr::new(pos, ExprKind::Const(Literal::Bool(true))),
                pos,
            },
        );
        self.eqs.insert(
            0,
            Equation {
                pat: Pattern::Var(f),
                expr: Expr::new(pos, ExprKind::Const(Literal::Bool(false))),
                pos,
            },
        );
        f
    }
}

fn op3(pos: Pos, op: Op, a: Expr, b: Expr, c: Expr) -> Expr {
    Expr::new(pos, ExprKind::OpApp(op, Box::new(Expr::new(pos, ExprKind::Tuple(vec![a, b, c])))))
}

/// Desugars `e` as a block of its own.
fn scoped(e: Expr, fresh: &mut Fresh) -> Expr {
    let mut sc = Scope::default();
    let pos = e.pos;
    let body = expr(e, &mut sc, fresh);
    if sc.inits.is_empty() && sc.eqs.is_empty() {
        return body;
    }
    Expr::new(
        pos,
        ExprKind::WhereRec {
            body: Box::new(body),
            inits: sc.inits,
            eqs: sc.eqs,
        },
    )
}

fn expr(e: Expr, sc: &mut Scope, fresh: &mut Fresh) -> Expr {
    let pos = e.pos;
    let kind = match e.kind {
        ExprKind::Pre(inner) => {
            let inner = expr(*inner, sc, fresh);
            match inner.kind {
                ExprKind::Var(x) if sc.defined.contains(&x) => {
                    if !sc.needs_memory.contains(&x) {
                        sc.needs_memory.push(x);
                    }
                    ExprKind::Last(x)
                }
                _ => {
                    let p = fresh.name("pre");
                    sc.inits.push(Init {
                        name: p,
                        value: Expr::new(pos, ExprKind::Const(Literal::Nil)),
                        pos,
                    });
                    sc.eqs.push(Equation {
                        pat: Pattern::Var(p),
                        expr: inner,
                        pos,
                    });
                    ExprKind::Last(p)
                }
            }
        }
        ExprKind::Arrow(a, b) => {
            let a = expr(*a, sc, fresh);
            let b = expr(*b, sc, fresh);
            let f = sc.first_flag(fresh, pos);
            return op3(pos, Op::If, Expr::new(pos, ExprKind::Last(f)), a, b);
        }
        ExprKind::If(c, t, e2) => {
            let c = expr(*c, sc, fresh);
            let t = expr(*t, sc, fresh);
            let e2 = expr(*e2, sc, fresh);
            return op3(pos, Op::If, c, t, e2);
        }
        ExprKind::Present { cond, then_, else_ } => ExprKind::Present {
            cond: Box::new(expr(*cond, sc, fresh)),
            then_: Box::new(scoped(*then_, fresh)),
            else_: Box::new(scoped(*else_, fresh)),
        },
        ExprKind::Reset { body, cond } => ExprKind::Reset {
            body: Box::new(scoped(*body, fresh)),
            cond: Box::new(expr(*cond, sc, fresh)),
        },
        ExprKind::Infer(n, body) => ExprKind::Infer(n, Box::new(scoped(*body, fresh))),
        ExprKind::WhereRec { body, inits, eqs } => return block(pos, *body, inits, eqs, fresh),
        ExprKind::Tuple(es) => ExprKind::Tuple(es.into_iter().map(|e| expr(e, sc, fresh)).collect()),
        ExprKind::OpApp(op, a) => ExprKind::OpApp(op, Box::new(expr(*a, sc, fresh))),
        ExprKind::Call(f, a) => ExprKind::Call(f, Box::new(expr(*a, sc, fresh))),
        ExprKind::Apply(f, args) => ExprKind::Apply(f, args.into_iter().map(|e| expr(e, sc, fresh)).collect()),
        ExprKind::Sample(a) => ExprKind::Sample(Box::new(expr(*a, sc, fresh))),
        ExprKind::Factor(a) => ExprKind::Factor(Box::new(expr(*a, sc, fresh))),
        ExprKind::Observe(a, b) => {
            let a = expr(*a, sc, fresh);
            ExprKind::Observe(Box::new(a), Box::new(expr(*b, sc, fresh)))
        }
        k @ (ExprKind::Const(_) | ExprKind::Var(_) | ExprKind::Last(_)) => k,
    };
    Expr { id: 0, pos, kind }
}

fn constant(e: &Expr) -> Option<Literal> {
    match &e.kind {
        ExprKind::Const(l) => Some(l.clone()),
        ExprKind::OpApp(Op::Neg, a) => match &a.kind {
            ExprKind::Const(Literal::Int(n)) => Some(Literal::Int(-n)),
            ExprKind::Const(Literal::Float(x)) => Some(Literal::Float(-x)),
            _ => None,
        },
        _ => None,
    }
}

/// Binds the names of a tuple pattern by projecting a fresh variable.
fn expand_pattern(pat: Pattern, e: Expr, pos: Pos, fresh: &mut Fresh, out: &mut Vec<(Name, Expr, Pos)>) {
    match pat {
        Pattern::Var(x) => out.push((x, e, pos)),
        Pattern::Wild | Pattern::Unit => out.push((fresh.name("eq"), e, pos)),
        Pattern::Tuple(ps) => {
            let t = fresh.name("tuple");
            out.push((t, e, pos));
            for (k, p) in ps.into_iter().enumerate() {
                let proj = Expr::new(
                    pos,
                    ExprKind::OpApp(Op::Nth(k), Box::new(Expr::new(pos, ExprKind::Var(t)))),
                );
                expand_pattern(p, proj, pos, fresh, out);
            }
        }
    }
}

fn block(pos: Pos, body: Expr, inits: Vec<Init>, eqs: Vec<Equation>, fresh: &mut Fresh) -> Expr {
    let mut sc = Scope::default();
    let mut flat: Vec<(Name, Expr, Pos)> = Vec::new();
    for eq in eqs {
        expand_pattern(eq.pat, eq.expr, eq.pos, fresh, &mut flat);
    }
    for (x, _, _) in &flat {
        sc.defined.insert(*x);
    }
    for i in &inits {
        sc.defined.insert(i.name);
    }

    let mut new_eqs: Vec<Equation> = Vec::new();
    for (x, e, p) in flat {
        let e = expr(e, &mut sc, fresh);
        new_eqs.push(Equation {
            pat: Pattern::Var(x),
            expr: e,
            pos: p,
        });
    }
    let mut body = expr(body, &mut sc, fresh);

    let mut kernel_inits: Vec<Init> = Vec::new();
    // (variable, replacement for `last x`, first-instant expression)
    let mut delayed: Vec<(Name, Name, Expr, Pos)> = Vec::new();
    for i in inits {
        match constant(&i.value) {
            Some(lit) => kernel_inits.push(Init {
                name: i.name,
                value: Expr::new(i.value.pos, ExprKind::Const(lit)),
                pos: i.pos,
            }),
            None => {
                let v = expr(i.value, &mut sc, fresh);
                let read = fresh.name(&format!("{}_last", i.name));
                kernel_inits.push(Init {
                    name: i.name,
                    value: Expr::new(i.pos, ExprKind::Const(Literal::Nil)),
                    pos: i.pos,
                });
                delayed.push((i.name, read, v, i.pos));
            }
        }
    }

    // Inits introduced while desugaring (first flag, hoisted `pre`) come from `sc`.
    let mut all_inits: Vec<Init> = Vec::new();
    let mut all_eqs: Vec<Equation> = Vec::new();
    if !delayed.is_empty() {
        sc.first_flag(fresh, pos);
    }
    // The first flag (if any) sits at the front of sc.inits / sc.eqs.
    let (mut sc_inits, mut sc_eqs) = (std::mem::take(&mut sc.inits), std::mem::take(&mut sc.eqs));
    if let Some(f) = sc.first {
        let fi = sc_inits.iter().position(|i| i.name == f).unwrap();
        all_inits.push(sc_inits.remove(fi));
        let fe = sc_eqs.iter().position(|e| e.pat == Pattern::Var(f)).unwrap();
        all_eqs.push(sc_eqs.remove(fe));
    }
    all_inits.extend(kernel_inits);
    all_eqs.extend(new_eqs);

    if !delayed.is_empty() {
        let f = sc.first.unwrap();
        for (x, read, _, _) in &delayed {
            for eq in all_eqs.iter_mut() {
                replace_last(&mut eq.expr, *x, *read);
            }
            for eq in sc_eqs.iter_mut() {
                replace_last(&mut eq.expr, *x, *read);
            }
            replace_last(&mut body, *x, *read);
        }
        for (x, read, v, p) in delayed {
            let present = Expr::new(
                p,
                ExprKind::Present {
                    cond: Box::new(Expr::new(p, ExprKind::Last(f))),
                    then_: Box::new(v),
                    else_: Box::new(Expr::new(p, ExprKind::Last(x))),
                },
            );
            all_eqs.push(Equation {
                pat: Pattern::Var(read),
                expr: present,
                pos: p,
            });
            if !all_eqs.iter().any(|e| e.pat == Pattern::Var(x)) {
                all_eqs.push(Equation {
                    pat: Pattern::Var(x),
                    expr: Expr::new(p, ExprKind::Var(read)),
                    pos: p,
                });
            }
        }
    }

    all_inits.extend(sc_inits);
    all_eqs.extend(sc_eqs);

    for x in sc.needs_memory {
        if !all_inits.iter().any(|i| i.name == x) {
            all_inits.push(Init {
                name: x,
                value: Expr::new(pos, ExprKind::Const(Literal::Nil)),
                pos,
            });
        }
    }
    // Every initialized variable needs a defining equation: `x = last x`.
    for i in &all_inits {
        if !all_eqs.iter().any(|e| e.pat == Pattern::Var(i.name)) {
            all_eqs.push(Equation {
                pat: Pattern::Var(i.name),
                expr: Expr::new(i.pos, ExprKind::Last(i.name)),
                pos: i.pos,
            });
        }
    }

    Expr::new(
        pos,
        ExprKind::WhereRec {
            body: Box::new(body),
            inits: all_inits,
            eqs: all_eqs,
        },
    )
}

/// Replaces `last x` by `read` outside nested blocks that redefine `x`.
fn replace_last(e: &mut Expr, x: Name, read: Name) {
    match &mut e.kind {
        ExprKind::Last(y) if *y == x => e.kind = ExprKind::Var(read),
        ExprKind::WhereRec { inits, eqs, .. }
            if inits.iter().any(|i| i.name == x) || eqs.iter().any(|q| q.pat == Pattern::Var(x)) => {}
        _ => {
            for c in e.children_mut() {
                replace_last(c, x, read);
            }
        }
    }
}
