//! Kinds (deterministic / probabilistic) and types.
//!
//! Types are inferred by unification. Distribution types carry a flag that
//! says whether a density is known (`t dist`) or only a sampler (`t dist*`);
//! two flags meet at the sampler, and `observe` pins its flag to density.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::frontend::ast::*;
use crate::names::Name;
use crate::ops::Op;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    D,
    P,
}

impl Kind {
    fn join(self, other: Kind) -> Kind {
        self.max(other)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeExpr {
    Bool,
    Int,
    Float,
    Unit,
    Tuple(Vec<TypeExpr>),
    Vector,
    Matrix,
    /// Fixed-size collection built by `iid`, read with `get`.
    Array(Box<TypeExpr>),
    /// `t dist`: a distribution with a known density.
    DistDensity(Box<TypeExpr>),
    /// `t dist*`: a distribution that can only be sampled.
    DistSampler(Box<TypeExpr>),
    Fn(Box<TypeExpr>, Kind, Box<TypeExpr>),
    /// A type left unconstrained by the program.
    Var(u32),
}

impl TypeExpr {
    /// `t dist` may be used wherever `t dist*` is expected.
    pub fn is_subtype_of(&self, other: &TypeExpr) -> bool {
        use TypeExpr::*;
        match (self, other) {
            (DistDensity(a), DistSampler(b)) | (DistDensity(a), DistDensity(b)) | (DistSampler(a), DistSampler(b)) => {
                a.is_subtype_of(b)
            }
            (Tuple(a), Tuple(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.is_subtype_of(y)),
            (Array(a), Array(b)) => a.is_subtype_of(b),
            (Fn(a, k, r), Fn(b, l, s)) => k <= l && b.is_subtype_of(a) && r.is_subtype_of(s),
            _ => self == other,
        }
    }

    /// The type of a runtime value, as far as it can be told from the value.
    pub fn of_value(v: &Value) -> TypeExpr {
        match v {
            Value::Bool(_) => TypeExpr::Bool,
            Value::Int(_) => TypeExpr::Int,
            Value::Float(_) => TypeExpr::Float,
            Value::Unit | Value::Nil => TypeExpr::Unit,
            Value::Vector(_) => TypeExpr::Vector,
            Value::Matrix(_) => TypeExpr::Matrix,
            Value::Tuple(xs) => {
                // Homogeneous tuples of booleans double as arrays (maps, for instance).
                TypeExpr::Tuple(xs.iter().map(TypeExpr::of_value).collect())
            }
            _ => TypeExpr::Var(0),
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TypeExpr::*;
        match self {
            Bool => write!(f, "bool"),
            Int => write!(f, "int"),
            Float => write!(f, "float"),
            Unit => write!(f, "unit"),
            Vector => write!(f, "vector"),
            Matrix => write!(f, "matrix"),
            Tuple(ts) => {
                write!(f, "(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "{}", t)?;
                }
                write!(f, ")")
            }
            Array(t) => write!(f, "{} array", t),
            DistDensity(t) => write!(f, "{} dist", t),
            DistSampler(t) => write!(f, "{} dist*", t),
            Fn(a, k, r) => write!(f, "{} -{:?}-> {}", a, k, r),
            Var(n) => write!(f, "'a{}", n),
        }
    }
}

/// A kind-checked program: every expression id maps to its kind and type.
#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub program: Program,
    pub annotations: HashMap<ExprId, (Kind, TypeExpr)>,
    /// Node signatures `param -kind-> result`.
    pub signatures: HashMap<Name, TypeExpr>,
}

impl TypedProgram {
    pub fn kind_of(&self, id: ExprId) -> Option<Kind> {
        self.annotations.get(&id).map(|(k, _)| *k)
    }

    pub fn type_of(&self, id: ExprId) -> Option<&TypeExpr> {
        self.annotations.get(&id).map(|(_, t)| t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Constraint {
    Any,
    Numeric,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Flag {
    Density,
    Sampler,
}

#[derive(Clone, Debug, PartialEq)]
enum Ty {
    Bool,
    Int,
    Float,
    Unit,
    Tuple(Vec<Ty>),
    Vector,
    Matrix,
    Array(Box<Ty>),
    Dist(Box<Ty>, usize),
    Var(usize),
}

#[derive(Clone, Debug)]
enum VarState {
    Free(Constraint),
    Bound(Ty),
}

#[derive(Clone, Debug)]
struct FlagState {
    parent: Option<usize>,
    value: Option<Flag>,
    /// Position of an `observe` that needs a density.
    needs_density: Option<Pos>,
}

#[derive(Clone)]
struct Signature {
    kind: DeclKind,
    param: Ty,
    body_kind: Kind,
    ret: Ty,
}

struct Checker {
    vars: Vec<VarState>,
    flags: Vec<FlagState>,
    nodes: HashMap<Name, Signature>,
    consts: HashMap<Name, Ty>,
    scope: Vec<(Name, Ty)>,
    ann: HashMap<ExprId, (Kind, Ty)>,
}

fn type_err<T>(pos: Pos, msg: impl Into<String>) -> Result<T> {
    Err(Error::Type {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    })
}

fn kind_err<T>(pos: Pos, msg: impl Into<String>) -> Result<T> {
    Err(Error::Kind {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    })
}

impl Checker {
    fn var(&mut self, c: Constraint) -> Ty {
        self.vars.push(VarState::Free(c));
        Ty::Var(self.vars.len() - 1)
    }

    fn flag(&mut self, value: Option<Flag>) -> usize {
        self.flags.push(FlagState {
            parent: None,
            value,
            needs_density: None,
        });
        self.flags.len() - 1
    }

    fn find_flag(&self, mut f: usize) -> usize {
        while let Some(p) = self.flags[f].parent {
            f = p;
        }
        f
    }

    fn check_flag(&self, f: usize) -> Result<()> {
        let st = &self.flags[f];
        if let (Some(Flag::Sampler), Some(pos)) = (st.value, st.needs_density) {
            return type_err(pos, "observe on a sampler-only distribution");
        }
        Ok(())
    }

    fn union_flags(&mut self, a: usize, b: usize) -> Result<()> {
        let (a, b) = (self.find_flag(a), self.find_flag(b));
        if a == b {
            return Ok(());
        }
        let value = match (self.flags[a].value, self.flags[b].value) {
            (Some(Flag::Sampler), _) | (_, Some(Flag::Sampler)) => Some(Flag::Sampler),
            (Some(Flag::Density), _) | (_, Some(Flag::Density)) => Some(Flag::Density),
            _ => None,
        };
        let needs = self.flags[a].needs_density.or(self.flags[b].needs_density);
        self.flags[b].parent = Some(a);
        self.flags[a].value = value;
        self.flags[a].needs_density = needs;
        self.check_flag(a)
    }

    fn require_density(&mut self, f: usize, pos: Pos) -> Result<()> {
        let r = self.find_flag(f);
        if self.flags[r].needs_density.is_none() {
            self.flags[r].needs_density = Some(pos);
        }
        self.check_flag(r)
    }

    fn resolve(&self, t: &Ty) -> Ty {
        match t {
            Ty::Var(v) => match &self.vars[*v] {
                VarState::Bound(b) => self.resolve(b),
                VarState::Free(_) => t.clone(),
            },
            _ => t.clone(),
        }
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.resolve(t) {
            Ty::Var(w) => v == w,
            Ty::Tuple(ts) => ts.iter().any(|t| self.occurs(v, t)),
            Ty::Array(t) | Ty::Dist(t, _) => self.occurs(v, &t),
            _ => false,
        }
    }

    fn satisfies(&self, t: &Ty, c: Constraint) -> bool {
        match c {
            Constraint::Any => true,
            Constraint::Numeric => matches!(t, Ty::Int | Ty::Float),
            Constraint::Array => matches!(t, Ty::Vector | Ty::Matrix),
        }
    }

    fn show(&self, t: &Ty) -> String {
        self.export(t, false).to_string()
    }

    fn unify(&mut self, a: &Ty, b: &Ty, pos: Pos) -> Result<()> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (Ty::Var(x), Ty::Var(y)) if x == y => Ok(()),
            (Ty::Var(x), Ty::Var(y)) => {
                let (cx, cy) = match (&self.vars[*x], &self.vars[*y]) {
                    (VarState::Free(cx), VarState::Free(cy)) => (*cx, *cy),
                    _ => unreachable!("resolved variables are free"),
                };
                let c = match (cx, cy) {
                    (Constraint::Any, c) | (c, Constraint::Any) => c,
                    (c, d) if c == d => c,
                    _ => return type_err(pos, "a value cannot be both a number and an array"),
                };
                self.vars[*y] = VarState::Free(c);
                self.vars[*x] = VarState::Bound(b.clone());
                Ok(())
            }
            (Ty::Var(x), t) | (t, Ty::Var(x)) => {
                let c = match &self.vars[*x] {
                    VarState::Free(c) => *c,
                    _ => unreachable!(),
                };
                if !self.satisfies(t, c) {
                    let what = if c == Constraint::Numeric { "a number" } else { "a vector or a matrix" };
                    return type_err(pos, format!("expected {}, found {}", what, self.show(t)));
                }
                if self.occurs(*x, t) {
                    return type_err(pos, "recursive type");
                }
                self.vars[*x] = VarState::Bound(t.clone());
                Ok(())
            }
            (Ty::Tuple(xs), Ty::Tuple(ys)) if xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.unify(x, y, pos)?;
                }
                Ok(())
            }
            (Ty::Array(x), Ty::Array(y)) => self.unify(x, y, pos),
            (Ty::Dist(x, f), Ty::Dist(y, g)) => {
                self.unify(x, y, pos)?;
                self.union_flags(*f, *g)
            }
            _ if a == b => Ok(()),
            _ => type_err(
                pos,
                format!("type mismatch: expected {}, found {}", self.show(&a), self.show(&b)),
            ),
        }
    }

    /// Converts to the public representation; `finish` applies defaults.
    fn export(&self, t: &Ty, finish: bool) -> TypeExpr {
        match self.resolve(t) {
            Ty::Bool => TypeExpr::Bool,
            Ty::Int => TypeExpr::Int,
            Ty::Float => TypeExpr::Float,
            Ty::Unit => TypeExpr::Unit,
            Ty::Vector => TypeExpr::Vector,
            Ty::Matrix => TypeExpr::Matrix,
            Ty::Tuple(ts) => TypeExpr::Tuple(ts.iter().map(|t| self.export(t, finish)).collect()),
            Ty::Array(t) => TypeExpr::Array(Box::new(self.export(&t, finish))),
            Ty::Dist(t, f) => {
                let inner = Box::new(self.export(&t, finish));
                match self.flags[self.find_flag(f)].value {
                    Some(Flag::Sampler) => TypeExpr::DistSampler(inner),
                    _ => TypeExpr::DistDensity(inner),
                }
            }
            Ty::Var(v) => match self.vars[v] {
                VarState::Free(Constraint::Numeric) if finish => TypeExpr::Float,
                _ => TypeExpr::Var(v as u32),
            },
        }
    }

    fn num(&mut self) -> Ty {
        self.var(Constraint::Numeric)
    }

    fn dist(&mut self, t: Ty, flag: Option<Flag>) -> Ty {
        let f = self.flag(flag);
        Ty::Dist(Box::new(t), f)
    }

    fn lookup(&self, x: Name, pos: Pos) -> Result<Ty> {
        if let Some((_, t)) = self.scope.iter().rev().find(|(n, _)| *n == x) {
            return Ok(t.clone());
        }
        if let Some(t) = self.consts.get(&x) {
            return Ok(t.clone());
        }
        Err(Error::Unbound {
            what: "variable",
            name: x.to_string(),
            line: pos.line,
            col: pos.col,
        })
    }

    fn lit(&mut self, l: &Literal) -> Ty {
        match l {
            Literal::Nil => self.var(Constraint::Any),
            Literal::Unit => Ty::Unit,
            Literal::Bool(_) => Ty::Bool,
            Literal::Int(_) => Ty::Int,
            Literal::Float(_) => Ty::Float,
        }
    }

    /// Argument and result types of an operator, with fresh variables.
    fn op_sig(&mut self, op: Op) -> (Ty, Ty) {
        use Op::*;
        let pair = |a: Ty, b: Ty| Ty::Tuple(vec![a, b]);
        match op {
            Add | Sub | Mul | Div | Min | Max => {
                let n = self.num();
                (pair(n.clone(), n.clone()), n)
            }
            Neg | Abs => {
                let n = self.num();
                (n.clone(), n)
            }
            Lt | Le | Gt | Ge | Eq | Ne => {
                let a = self.var(Constraint::Any);
                (pair(a.clone(), a), Ty::Bool)
            }
            And | Or => (pair(Ty::Bool, Ty::Bool), Ty::Bool),
            Not => (Ty::Bool, Ty::Bool),
            If => {
                let a = self.var(Constraint::Any);
                (Ty::Tuple(vec![Ty::Bool, a.clone(), a.clone()]), a)
            }
            Exp | Log | Sqrt | Sin | Cos | FloatOfInt => (self.num(), Ty::Float),
            IntOfFloat => (self.num(), Ty::Int),
            Pow => {
                let (a, b) = (self.num(), self.num());
                (pair(a, b), Ty::Float)
            }
            Fst | Snd => {
                let (a, b) = (self.var(Constraint::Any), self.var(Constraint::Any));
                let r = if op == Fst { a.clone() } else { b.clone() };
                (pair(a, b), r)
            }
            Get => {
                let a = self.var(Constraint::Any);
                (pair(Ty::Array(Box::new(a.clone())), Ty::Int), a)
            }
            VecGet => (pair(Ty::Vector, Ty::Int), Ty::Float),
            VAdd | VSub => {
                let a = self.var(Constraint::Array);
                (pair(a.clone(), a.clone()), a)
            }
            MatMul => {
                let a = self.var(Constraint::Array);
                (pair(Ty::Matrix, a.clone()), a)
            }
            Lqr => (Ty::Tuple(vec![Ty::Matrix, Ty::Matrix, Ty::Vector]), Ty::Vector),
            Gaussian | Beta => {
                let (a, b) = (self.num(), self.num());
                (pair(a, b), self.dist(Ty::Float, Some(Flag::Density)))
            }
            Bernoulli => (self.num(), self.dist(Ty::Bool, Some(Flag::Density))),
            Poisson => (self.num(), self.dist(Ty::Int, Some(Flag::Density))),
            Dirac => {
                let a = self.var(Constraint::Any);
                (a.clone(), self.dist(a, None))
            }
            MvGaussian => (pair(Ty::Vector, Ty::Matrix), self.dist(Ty::Vector, Some(Flag::Density))),
            UniformInt => (pair(Ty::Int, Ty::Int), self.dist(Ty::Int, Some(Flag::Density))),
            Iid => {
                let a = self.var(Constraint::Any);
                let f = self.flag(None);
                (
                    pair(Ty::Dist(Box::new(a.clone()), f), Ty::Int),
                    Ty::Dist(Box::new(Ty::Array(Box::new(a))), f),
                )
            }
            Eval => {
                let a = self.var(Constraint::Any);
                (a.clone(), a)
            }
            Nth(_) | Mean | Variance => unreachable!("handled by the checker"),
        }
    }

    fn moment_type(&mut self, t: &Ty, variance: bool, pos: Pos) -> Result<Ty> {
        Ok(match self.resolve(t) {
            Ty::Bool | Ty::Int | Ty::Float => Ty::Float,
            Ty::Vector if variance => Ty::Matrix,
            Ty::Vector => Ty::Vector,
            Ty::Matrix if !variance => Ty::Matrix,
            Ty::Unit => Ty::Unit,
            Ty::Array(t) => Ty::Array(Box::new(self.moment_type(&t, variance, pos)?)),
            Ty::Tuple(ts) => {
                let mut out = Vec::new();
                for t in &ts {
                    out.push(self.moment_type(t, variance, pos)?);
                }
                Ty::Tuple(out)
            }
            v @ Ty::Var(_) => {
                // Unknown payloads are taken to be scalars.
                self.unify(&v, &Ty::Float, pos)?;
                Ty::Float
            }
            other => return type_err(pos, format!("no moments for values of type {}", self.show(&other))),
        })
    }

    fn instantiate(&mut self, sig: &Signature) -> (Ty, Ty) {
        let mut vmap = HashMap::new();
        let mut fmap = HashMap::new();
        let p = self.copy(&sig.param, &mut vmap, &mut fmap);
        let r = self.copy(&sig.ret, &mut vmap, &mut fmap);
        (p, r)
    }

    fn copy(&mut self, t: &Ty, vmap: &mut HashMap<usize, Ty>, fmap: &mut HashMap<usize, usize>) -> Ty {
        match self.resolve(t) {
            Ty::Var(v) => {
                if let Some(n) = vmap.get(&v) {
                    return n.clone();
                }
                let c = match self.vars[v] {
                    VarState::Free(c) => c,
                    _ => unreachable!(),
                };
                let n = self.var(c);
                vmap.insert(v, n.clone());
                n
            }
            Ty::Tuple(ts) => Ty::Tuple(ts.iter().map(|t| self.copy(t, vmap, fmap)).collect()),
            Ty::Array(t) => Ty::Array(Box::new(self.copy(&t, vmap, fmap))),
            Ty::Dist(t, f) => {
                let inner = self.copy(&t, vmap, fmap);
                let root = self.find_flag(f);
                let nf = match fmap.get(&root) {
                    Some(n) => *n,
                    None => {
                        let st = self.flags[root].clone();
                        let n = self.flag(st.value);
                        self.flags[n].needs_density = st.needs_density;
                        fmap.insert(root, n);
                        n
                    }
                };
                Ty::Dist(Box::new(inner), nf)
            }
            other => other,
        }
    }

    fn bind_pattern(&mut self, p: &Pattern, t: &Ty, pos: Pos) -> Result<()> {
        match p {
            Pattern::Var(x) => self.scope.push((*x, t.clone())),
            Pattern::Wild => {}
            Pattern::Unit => self.unify(t, &Ty::Unit, pos)?,
            Pattern::Tuple(ps) => {
                let ts: Vec<Ty> = ps.iter().map(|_| self.var(Constraint::Any)).collect();
                self.unify(t, &Ty::Tuple(ts.clone()), pos)?;
                for (p, t) in ps.iter().zip(&ts) {
                    self.bind_pattern(p, t, pos)?;
                }
            }
        }
        Ok(())
    }

    /// `det` is true where probabilistic constructs are forbidden.
    fn expr(&mut self, e: &Expr, det: bool) -> Result<(Kind, Ty)> {
        let pos = e.pos;
        let (k, t) = match &e.kind {
            ExprKind::Const(l) => (Kind::D, self.lit(l)),
            ExprKind::Var(x) | ExprKind::Last(x) => (Kind::D, self.lookup(*x, pos)?),
            ExprKind::Tuple(es) => {
                let mut k = Kind::D;
                let mut ts = Vec::new();
                for e in es {
                    let (ke, te) = self.expr(e, det)?;
                    k = k.join(ke);
                    ts.push(te);
                }
                (k, Ty::Tuple(ts))
            }
            ExprKind::OpApp(op, arg) => {
                let (k, ta) = self.expr(arg, det)?;
                let tr = match op {
                    Op::Nth(i) => match self.resolve(&ta) {
                        Ty::Tuple(ts) if *i < ts.len() => ts[*i].clone(),
                        other => {
                            return type_err(
                                pos,
                                format!("cannot project component {} of {}", i, self.show(&other)),
                            )
                        }
                    },
                    Op::Mean | Op::Variance => {
                        let a = self.var(Constraint::Any);
                        let d = self.dist(a.clone(), None);
                        self.unify(&d, &ta, pos)?;
                        self.moment_type(&a, *op == Op::Variance, pos)?
                    }
                    _ => {
                        let (targ, tres) = self.op_sig(*op);
                        self.unify(&targ, &ta, pos)?;
                        tres
                    }
                };
                (k, tr)
            }
            ExprKind::Call(f, arg) => {
                let sig = match self.nodes.get(f) {
                    Some(s) => s.clone(),
                    None => {
                        return Err(Error::Unbound {
                            what: "function",
                            name: f.to_string(),
                            line: pos.line,
                            col: pos.col,
                        })
                    }
                };
                let (k, ta) = self.expr(arg, det)?;
                let (tp, tr) = self.instantiate(&sig);
                self.unify(&tp, &ta, pos)?;
                let callee = if sig.kind == DeclKind::Proba { Kind::P } else { sig.body_kind };
                if det && callee == Kind::P {
                    return kind_err(
                        pos,
                        format!("probabilistic construct in deterministic context (call to `{}`)", f),
                    );
                }
                (k.join(callee), tr)
            }
            ExprKind::WhereRec { body, inits, eqs } => {
                let mark = self.scope.len();
                let mut names: Vec<Name> = Vec::new();
                for eq in eqs {
                    eq.pat.names(&mut names);
                }
                for i in inits {
                    if !names.contains(&i.name) {
                        names.push(i.name);
                    }
                }
                for x in &names {
                    let v = self.var(Constraint::Any);
                    self.scope.push((*x, v));
                }
                let mut k = Kind::D;
                for i in inits {
                    let (_, ti) = self.expr(&i.value, det)?;
                    let tx = self.lookup(i.name, i.pos)?;
                    self.unify(&tx, &ti, i.pos)?;
                }
                for eq in eqs {
                    let (ke, te) = self.expr(&eq.expr, det)?;
                    k = k.join(ke);
                    let tp = self.pattern_type(&eq.pat, eq.pos)?;
                    self.unify(&tp, &te, eq.pos)?;
                }
                let (kb, tb) = self.expr(body, det)?;
                self.scope.truncate(mark);
                (k.join(kb), tb)
            }
            ExprKind::Present { cond, then_, else_ } => {
                let (kc, tc) = self.expr(cond, det)?;
                self.unify(&Ty::Bool, &tc, cond.pos)?;
                let (kt, tt) = self.expr(then_, det)?;
                let (ke, te) = self.expr(else_, det)?;
                self.unify(&tt, &te, else_.pos)?;
                (kc.join(kt).join(ke), tt)
            }
            ExprKind::Reset { body, cond } => {
                let (kb, tb) = self.expr(body, det)?;
                let (kc, tc) = self.expr(cond, det)?;
                self.unify(&Ty::Bool, &tc, cond.pos)?;
                (kb.join(kc), tb)
            }
            ExprKind::Sample(d) => {
                if det {
                    return kind_err(pos, "probabilistic construct in deterministic context (sample)");
                }
                let (_, td) = self.expr(d, det)?;
                let a = self.var(Constraint::Any);
                let expected = self.dist(a.clone(), None);
                self.unify(&expected, &td, d.pos)?;
                (Kind::P, a)
            }
            ExprKind::Observe(d, v) => {
                if det {
                    return kind_err(pos, "probabilistic construct in deterministic context (observe)");
                }
                let (_, td) = self.expr(d, det)?;
                let (_, tv) = self.expr(v, det)?;
                let f = self.flag(None);
                self.unify(&Ty::Dist(Box::new(tv), f), &td, d.pos)?;
                self.require_density(f, pos)?;
                (Kind::P, Ty::Unit)
            }
            ExprKind::Factor(w) => {
                if det {
                    return kind_err(pos, "probabilistic construct in deterministic context (factor)");
                }
                let (_, tw) = self.expr(w, det)?;
                self.unify(&Ty::Float, &tw, w.pos)?;
                (Kind::P, Ty::Unit)
            }
            ExprKind::Infer(_, body) => {
                let (_, tb) = self.expr(body, false)?;
                (Kind::D, self.dist(tb, Some(Flag::Sampler)))
            }
            ExprKind::Pre(_) | ExprKind::Arrow(..) | ExprKind::If(..) | ExprKind::Apply(..) => {
                return type_err(pos, "surface construct left after desugaring");
            }
        };
        self.ann.insert(e.id, (k, t.clone()));
        Ok((k, t))
    }

    fn pattern_type(&mut self, p: &Pattern, pos: Pos) -> Result<Ty> {
        Ok(match p {
            Pattern::Var(x) => self.lookup(*x, pos)?,
            Pattern::Wild => self.var(Constraint::Any),
            Pattern::Unit => Ty::Unit,
            Pattern::Tuple(ps) => {
                let mut ts = Vec::new();
                for p in ps {
                    ts.push(self.pattern_type(p, pos)?);
                }
                Ty::Tuple(ts)
            }
        })
    }

    fn ty_of_type_expr(&mut self, t: &TypeExpr) -> Ty {
        match t {
            TypeExpr::Bool => Ty::Bool,
            TypeExpr::Int => Ty::Int,
            TypeExpr::Float => Ty::Float,
            TypeExpr::Unit => Ty::Unit,
            TypeExpr::Vector => Ty::Vector,
            TypeExpr::Matrix => Ty::Matrix,
            TypeExpr::Tuple(ts) => Ty::Tuple(ts.iter().map(|t| self.ty_of_type_expr(t)).collect()),
            TypeExpr::Array(t) => Ty::Array(Box::new(self.ty_of_type_expr(t))),
            TypeExpr::DistDensity(t) => {
                let inner = self.ty_of_type_expr(t);
                self.dist(inner, Some(Flag::Density))
            }
            TypeExpr::DistSampler(t) => {
                let inner = self.ty_of_type_expr(t);
                self.dist(inner, Some(Flag::Sampler))
            }
            TypeExpr::Fn(..) | TypeExpr::Var(_) => self.var(Constraint::Any),
        }
    }
}

/// Kind- and type-checks a desugared program. `globals` gives the types of
/// externally supplied constants.
pub fn kind_check(prog: Program, globals: &[(Name, TypeExpr)]) -> Result<TypedProgram> {
    let mut c = Checker {
        vars: Vec::new(),
        flags: Vec::new(),
        nodes: HashMap::new(),
        consts: HashMap::new(),
        scope: Vec::new(),
        ann: HashMap::new(),
    };
    for (n, t) in globals {
        let ty = c.ty_of_type_expr(t);
        c.consts.insert(*n, ty);
    }
    let mut sigs: Vec<(Name, Signature)> = Vec::new();
    for d in &prog.decls {
        match d {
            Decl::Const(cd) => {
                let (_, t) = c.expr(&cd.body, true)?;
                c.consts.insert(cd.name, t);
            }
            Decl::Node(n) => {
                let tp = c.var(Constraint::Any);
                c.scope.clear();
                c.bind_pattern(&n.param, &tp, n.pos)?;
                let det = n.kind == DeclKind::Node;
                let (k, tr) = c.expr(&n.body, det)?;
                c.scope.clear();
                let sig = Signature {
                    kind: n.kind,
                    param: tp,
                    body_kind: k,
                    ret: tr,
                };
                c.nodes.insert(n.name, sig.clone());
                sigs.push((n.name, sig));
            }
        }
    }
    let annotations: HashMap<ExprId, (Kind, TypeExpr)> =
        c.ann.iter().map(|(id, (k, t))| (*id, (*k, c.export(t, true)))).collect();
    let signatures = sigs
        .into_iter()
        .map(|(n, s)| {
            let k = if s.kind == DeclKind::Proba { Kind::P } else { s.body_kind };
            (
                n,
                TypeExpr::Fn(Box::new(c.export(&s.param, true)), k, Box::new(c.export(&s.ret, true))),
            )
        })
        .collect();
    let mut typed = TypedProgram {
        program: prog,
        annotations,
        signatures,
    };
    zero_inits(&mut typed);
    Ok(typed)
}

/// The zero of a type, for memories whose first value is never read.
fn zero(t: &TypeExpr, pos: Pos) -> Option<Expr> {
    let lit = |l| Some(Expr::new(pos, ExprKind::Const(l)));
    match t {
        TypeExpr::Bool => lit(Literal::Bool(false)),
        TypeExpr::Int => lit(Literal::Int(0)),
        TypeExpr::Float => lit(Literal::Float(0.0)),
        TypeExpr::Unit => lit(Literal::Unit),
        TypeExpr::Tuple(ts) => {
            let items: Option<Vec<Expr>> = ts.iter().map(|t| zero(t, pos)).collect();
            Some(Expr::new(pos, ExprKind::Tuple(items?)))
        }
        _ => None,
    }
}

/// Replaces `nil` initial memories by the zero of the variable's type where
/// one exists; others keep `nil`, which every operator propagates.
fn zero_inits(typed: &mut TypedProgram) {
    fn go(e: &mut Expr, ann: &HashMap<ExprId, (Kind, TypeExpr)>) {
        if let ExprKind::WhereRec { inits, eqs, .. } = &mut e.kind {
            for i in inits.iter_mut() {
                if i.value.kind != ExprKind::Const(Literal::Nil) {
                    continue;
                }
                let ty = eqs
                    .iter()
                    .find(|q| q.pat == Pattern::Var(i.name))
                    .and_then(|q| ann.get(&q.expr.id))
                    .map(|(_, t)| t.clone());
                if let Some(z) = ty.and_then(|t| zero(&t, i.pos)) {
                    let id = i.value.id;
                    i.value = z;
                    i.value.id = id;
                }
            }
        }
        for c in e.children_mut() {
            go(c, ann);
        }
    }
    let ann = typed.annotations.clone();
    for d in &mut typed.program.decls {
        match d {
            Decl::Node(n) => go(&mut n.body, &ann),
            Decl::Const(c) => go(&mut c.body, &ann),
        }
    }
}
