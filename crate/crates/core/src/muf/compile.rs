//! Compilation of kernel expressions into transition functions.
//!
//! `C(e)` is the function `fun s -> (value, s')`. Intermediate functions are
//! reduced statically: `comp(e, s)` produces the body of `C(e)` applied to
//! the state variable `s`, as a chain of `let`s.

use std::collections::HashMap;

use crate::frontend::ast::*;
use crate::frontend::typing::TypedProgram;
use crate::muf::alloc::{allocate, literal};
use crate::muf::term::*;
use crate::names::{last_name, Name};
use crate::value::Value;

pub struct Compiler {
    next: u32,
}

impl Default for Compiler {
    fn default() -> Self {
        Compiler::new()
    }
}

fn var(x: Name) -> MufTerm {
    MufTerm::Var(x)
}

fn pvar(x: Name) -> MufPattern {
    MufPattern::Var(x)
}

impl Compiler {
    pub fn new() -> Compiler {
        Compiler { next: 0 }
    }

    fn fresh(&mut self, base: &str) -> Name {
        self.next += 1;
        Name::new(&format!("{}#{}", base, self.next))
    }

    /// `C(e)` as a `Fun`.
    pub fn compile(&mut self, e: &Expr) -> MufTerm {
        let s = self.fresh("s");
        MufTerm::Fun(pvar(s), Box::new(self.comp(e, s)))
    }

    /// `let (v, s') = C(e)(s) in k(v, s')`
    fn bind(&mut self, e: &Expr, s: Name, k: impl FnOnce(&mut Self, Name, Name) -> MufTerm) -> MufTerm {
        let v = self.fresh("v");
        let s2 = self.fresh("s");
        let bound = self.comp(e, s);
        let body = k(self, v, s2);
        MufTerm::let_(MufPattern::Tuple(vec![pvar(v), pvar(s2)]), bound, body)
    }

    /// Binds a tuple state to fresh names, one per component.
    fn split(&mut self, n: usize) -> (MufPattern, Vec<Name>) {
        let names: Vec<Name> = (0..n).map(|_| self.fresh("s")).collect();
        (MufPattern::tuple(names.iter().map(|x| pvar(*x)).collect()), names)
    }

    fn state_tuple(names: &[Name]) -> MufTerm {
        MufTerm::tuple(names.iter().map(|x| var(*x)).collect())
    }

    pub fn comp(&mut self, e: &Expr, s: Name) -> MufTerm {
        match &e.kind {
            ExprKind::Const(l) => MufTerm::pair(MufTerm::Const(literal(l)), var(s)),
            ExprKind::Var(x) => MufTerm::pair(var(*x), var(s)),
            ExprKind::Last(x) => MufTerm::pair(var(last_name(*x)), var(s)),
            ExprKind::Tuple(es) => {
                let (pat, ss) = self.split(es.len());
                let mut vals = Vec::new();
                let mut outs = Vec::new();
                let mut binds = Vec::new();
                for (e, si) in es.iter().zip(&ss) {
                    let v = self.fresh("v");
                    let so = self.fresh("s");
                    binds.push((MufPattern::Tuple(vec![pvar(v), pvar(so)]), self.comp(e, *si)));
                    vals.push(var(v));
                    outs.push(so);
                }
                let mut body = MufTerm::pair(MufTerm::tuple(vals), Self::state_tuple(&outs));
                for (p, b) in binds.into_iter().rev() {
                    body = MufTerm::let_(p, b, body);
                }
                MufTerm::let_(pat, var(s), body)
            }
            ExprKind::OpApp(op, a) => {
                let op = *op;
                self.bind(a, s, |_, v, s2| {
                    MufTerm::pair(MufTerm::OpApp(op, Box::new(var(v))), var(s2))
                })
            }
            ExprKind::Call(f, a) => {
                let f = *f;
                let (sf, sa) = (self.fresh("s"), self.fresh("s"));
                let inner = self.bind(a, sa, |c, v, sa2| {
                    let r = c.fresh("v");
                    let sf2 = c.fresh("s");
                    MufTerm::let_(
                        MufPattern::Tuple(vec![pvar(r), pvar(sf2)]),
                        MufTerm::App(Box::new(var(f)), Box::new(MufTerm::pair(var(sf), var(v)))),
                        MufTerm::pair(var(r), MufTerm::pair(var(sf2), var(sa2))),
                    )
                });
                MufTerm::let_(MufPattern::Tuple(vec![pvar(sf), pvar(sa)]), var(s), inner)
            }
            ExprKind::WhereRec { body, inits, eqs } => {
                let (m, ss, sb) = (self.fresh("s"), self.fresh("s"), self.fresh("s"));
                let (eq_pat, eq_states) = self.split(eqs.len());
                let mut binds: Vec<(MufPattern, MufTerm)> = Vec::new();
                binds.push((
                    MufPattern::tuple(inits.iter().map(|i| pvar(last_name(i.name))).collect()),
                    var(m),
                ));
                binds.push((eq_pat, var(ss)));
                let mut outs = Vec::new();
                for (q, si) in eqs.iter().zip(&eq_states) {
                    let so = self.fresh("s");
                    let x = match &q.pat {
                        Pattern::Var(x) => *x,
                        _ => panic!("equation patterns are variables after desugaring"),
                    };
                    binds.push((MufPattern::Tuple(vec![pvar(x), pvar(so)]), self.comp(&q.expr, *si)));
                    outs.push(so);
                }
                let v = self.fresh("v");
                let sb2 = self.fresh("s");
                binds.push((MufPattern::Tuple(vec![pvar(v), pvar(sb2)]), self.comp(body, sb)));
                let memory = MufTerm::tuple(inits.iter().map(|i| var(i.name)).collect());
                let mut out = MufTerm::pair(
                    var(v),
                    MufTerm::tuple(vec![memory, Self::state_tuple(&outs), var(sb2)]),
                );
                for (p, b) in binds.into_iter().rev() {
                    out = MufTerm::let_(p, b, out);
                }
                MufTerm::let_(MufPattern::Tuple(vec![pvar(m), pvar(ss), pvar(sb)]), var(s), out)
            }
            ExprKind::Present { cond, then_, else_ } => {
                let (sc, st, se) = (self.fresh("s"), self.fresh("s"), self.fresh("s"));
                let inner = self.bind(cond, sc, |c, vc, sc2| {
                    let then_branch = c.bind(then_, st, |_, v, st2| {
                        MufTerm::pair(var(v), MufTerm::tuple(vec![var(sc2), var(st2), var(se)]))
                    });
                    let else_branch = c.bind(else_, se, |_, v, se2| {
                        MufTerm::pair(var(v), MufTerm::tuple(vec![var(sc2), var(st), var(se2)]))
                    });
                    MufTerm::If(Box::new(var(vc)), Box::new(then_branch), Box::new(else_branch))
                });
                MufTerm::let_(MufPattern::Tuple(vec![pvar(sc), pvar(st), pvar(se)]), var(s), inner)
            }
            ExprKind::Reset { body, cond } => {
                let (s0, s1, s2) = (self.fresh("s"), self.fresh("s"), self.fresh("s"));
                let inner = self.bind(cond, s2, |c, vc, s2b| {
                    let st = c.fresh("s");
                    let run = c.bind(body, st, |_, v, s1b| {
                        MufTerm::pair(var(v), MufTerm::tuple(vec![var(s0), var(s1b), var(s2b)]))
                    });
                    MufTerm::let_(
                        pvar(st),
                        MufTerm::If(Box::new(var(vc)), Box::new(var(s0)), Box::new(var(s1))),
                        run,
                    )
                });
                MufTerm::let_(MufPattern::Tuple(vec![pvar(s0), pvar(s1), pvar(s2)]), var(s), inner)
            }
            ExprKind::Sample(a) => self.bind(a, s, |_, v, s2| {
                MufTerm::pair(MufTerm::Sample(Box::new(var(v))), var(s2))
            }),
            ExprKind::Factor(a) => self.bind(a, s, |_, v, s2| {
                MufTerm::pair(MufTerm::Factor(Box::new(var(v))), var(s2))
            }),
            ExprKind::Observe(d, x) => {
                let (s1, s2) = (self.fresh("s"), self.fresh("s"));
                let inner = self.bind(d, s1, |c, vd, s1b| {
                    c.bind(x, s2, |_, vx, s2b| {
                        MufTerm::pair(
                            MufTerm::Observe(Box::new(var(vd)), Box::new(var(vx))),
                            MufTerm::pair(var(s1b), var(s2b)),
                        )
                    })
                });
                MufTerm::let_(MufPattern::Tuple(vec![pvar(s1), pvar(s2)]), var(s), inner)
            }
            ExprKind::Infer(_, body) => MufTerm::Infer {
                site: e.id,
                model: Box::new(self.compile(body)),
                state: Box::new(var(s)),
            },
            ExprKind::Pre(_) | ExprKind::Arrow(..) | ExprKind::If(..) | ExprKind::Apply(..) => {
                panic!("surface construct left after desugaring")
            }
        }
    }
}

/// Compiles every declaration of a checked and scheduled program.
pub fn compile_program(typed: &TypedProgram) -> MufProgram {
    let mut c = Compiler::new();
    let mut prog = MufProgram::default();
    let mut inits: HashMap<Name, Value> = HashMap::new();
    for d in &typed.program.decls {
        match d {
            Decl::Node(n) => {
                let s = c.fresh("s");
                let p = c.fresh("p");
                let body = c.comp(&n.body, s);
                let body = bind_param(&n.param, p, body);
                let step = MufTerm::Fun(MufPattern::Tuple(vec![pvar(s), pvar(p)]), Box::new(body));
                let init = allocate(&n.body, &inits);
                inits.insert(n.name, init.clone());
                prog.defs.insert(n.name, MufDef { kind: n.kind, init, step });
                prog.order.push(n.name);
            }
            Decl::Const(cd) => {
                let term = c.compile(&cd.body);
                let init = allocate(&cd.body, &inits);
                prog.consts.push((cd.name, term, init));
            }
        }
    }
    prog
}

fn pattern(p: &Pattern) -> MufPattern {
    match p {
        Pattern::Var(x) => MufPattern::Var(*x),
        Pattern::Wild | Pattern::Unit => MufPattern::Wild,
        Pattern::Tuple(ps) => MufPattern::Tuple(ps.iter().map(pattern).collect()),
    }
}

fn bind_param(p: &Pattern, v: Name, body: MufTerm) -> MufTerm {
    match p {
        Pattern::Wild | Pattern::Unit => body,
        _ => MufTerm::let_(pattern(p), var(v), body),
    }
}
