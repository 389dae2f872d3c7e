//! Abstract syntax of the kernel language and its surface sugar.

use crate::names::Name;
use crate::ops::Op;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    /// Dummy initial memory that is provably never read (`pre` at the first instant).
    Nil,
    Unit,
    Bool(bool),
    Int(i64),
    Float(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Var(Name),
    Wild,
    Unit,
    Tuple(Vec<Pattern>),
}

impl Pattern {
    pub fn names(&self, out: &mut Vec<Name>) {
        match self {
            Pattern::Var(x) => out.push(*x),
            Pattern::Tuple(ps) => ps.iter().for_each(|p| p.names(out)),
            Pattern::Wild | Pattern::Unit => {}
        }
    }
}

pub type ExprId = u32;

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub id: ExprId,
    pub pos: Pos,
    pub kind: ExprKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub pat: Pattern,
    pub expr: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Init {
    pub name: Name,
    /// A `Const` after desugaring.
    pub value: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Const(Literal),
    Var(Name),
    /// Tuples of any arity; the kernel pair is the two-element case.
    Tuple(Vec<Expr>),
    OpApp(Op, Box<Expr>),
    Call(Name, Box<Expr>),
    Last(Name),
    WhereRec {
        body: Box<Expr>,
        inits: Vec<Init>,
        eqs: Vec<Equation>,
    },
    Present {
        cond: Box<Expr>,
        then_: Box<Expr>,
        else_: Box<Expr>,
    },
    Reset {
        body: Box<Expr>,
        cond: Box<Expr>,
    },
    Sample(Box<Expr>),
    Observe(Box<Expr>, Box<Expr>),
    Factor(Box<Expr>),
    /// Particle count (when written) and the model expression.
    Infer(Option<u32>, Box<Expr>),
    // Surface sugar, removed by the desugarer.
    Pre(Box<Expr>),
    Arrow(Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `f a b ...` before resolution into an operator or a node call.
    Apply(Name, Vec<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Node,
    Proba,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeDecl {
    pub kind: DeclKind,
    pub name: Name,
    pub param: Pattern,
    pub body: Expr,
    pub pos: Pos,
}

/// `let x = e`: a constant computed once when the program is loaded.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstDecl {
    pub name: Name,
    pub body: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Node(NodeDecl),
    Const(ConstDecl),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn nodes(&self) -> impl Iterator<Item = &NodeDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Node(n) => Some(n),
            _ => None,
        })
    }

    pub fn node(&self, name: &str) -> Option<&NodeDecl> {
        self.nodes().find(|n| n.name.as_str() == name)
    }
}

impl Expr {
    pub fn new(pos: Pos, kind: ExprKind) -> Expr {
        Expr { id: 0, pos, kind }
    }

    /// Direct children, in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Const(_) | Var(_) | Last(_) => vec![],
            Tuple(es) => es.iter().collect(),
            OpApp(_, e) | Call(_, e) | Sample(e) | Factor(e) | Infer(_, e) | Pre(e) => vec![e],
            Observe(a, b) | Arrow(a, b) => vec![a, b],
            WhereRec { body, inits, eqs } => {
                let mut v: Vec<&Expr> = inits.iter().map(|i| &i.value).collect();
                v.extend(eqs.iter().map(|e| &e.expr));
                v.push(body);
                v
            }
            Present { cond, then_, else_ } => vec![cond, then_, else_],
            If(c, t, e) => vec![c, t, e],
            Reset { body, cond } => vec![body, cond],
            Apply(_, es) => es.iter().collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        use ExprKind::*;
        match &mut self.kind {
            Const(_) | Var(_) | Last(_) => vec![],
            Tuple(es) => es.iter_mut().collect(),
            OpApp(_, e) | Call(_, e) | Sample(e) | Factor(e) | Infer(_, e) | Pre(e) => vec![e],
            Observe(a, b) | Arrow(a, b) => vec![a, b],
            WhereRec { body, inits, eqs } => {
                let mut v: Vec<&mut Expr> = inits.iter_mut().map(|i| &mut i.value).collect();
                v.extend(eqs.iter_mut().map(|e| &mut e.expr));
                v.push(body);
                v
            }
            Present { cond, then_, else_ } => vec![cond, then_, else_],
            If(c, t, e) => vec![c, t, e],
            Reset { body, cond } => vec![body, cond],
            Apply(_, es) => es.iter_mut().collect(),
        }
    }

    /// Visits every sub-expression, parents before children.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

/// Assigns fresh, unique ids to every expression of the program.
pub fn number_program(prog: &mut Program) {
    fn go(e: &mut Expr, next: &mut ExprId) {
        e.id = *next;
        *next += 1;
        for c in e.children_mut() {
            go(c, next);
        }
    }
    let mut next = 1;
    for d in &mut prog.decls {
        match d {
            Decl::Node(n) => go(&mut n.body, &mut next),
            Decl::Const(c) => go(&mut c.body, &mut next),
        }
    }
}
