use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::frontend::ast::*;
use crate::frontend::lexer::{lex, Tok, Token};
use crate::names::Name;
use crate::ops::Op;

/// Parses a program whose free names may only be its own declarations.
pub fn parse(src: &str) -> Result<Program> {
    parse_with_globals(src, &[])
}

/// Parses a program that may also refer to externally supplied constants.
pub fn parse_with_globals(src: &str, globals: &[Name]) -> Result<Program> {
    let tokens = lex(src)?;
    let mut p = Parser { toks: tokens, at: 0 };
    let mut prog = Program::default();
    while p.peek() != &Tok::Eof {
        prog.decls.push(p.decl()?);
    }
    resolve(&mut prog, globals)?;
    number_program(&mut prog);
    Ok(prog)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        let pos = self.pos();
        Err(Error::Syntax {
            line: pos.line,
            col: pos.col,
            msg: msg.into(),
        })
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("identifier `{}`", s),
            Tok::Int(n) => format!("integer `{}`", n),
            Tok::Float(x) => format!("float `{}`", x),
            Tok::Kw(k) => format!("keyword `{}`", k),
            Tok::Sym(s) => format!("`{}`", s),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn expect_kw(&mut self, k: &str) -> Result<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected `{}`, found {}", k, Self::describe(self.peek())))
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected `{}`, found {}", s, Self::describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Name::new(&s))
            }
            t => self.fail(format!("expected an identifier, found {}", Self::describe(&t))),
        }
    }

    fn decl(&mut self) -> Result<Decl> {
        let pos = self.pos();
        self.expect_kw("let")?;
        let kind = if self.is_kw("node") {
            Some(DeclKind::Node)
        } else if self.is_kw("proba") {
            Some(DeclKind::Proba)
        } else {
            None
        };
        match kind {
            Some(kind) => {
                self.bump();
                let name = self.ident()?;
                let param = self.pattern()?;
                self.expect_sym("=")?;
                let body = self.expr()?;
                Ok(Decl::Node(NodeDecl {
                    kind,
                    name,
                    param,
                    body,
                    pos,
                }))
            }
            None => {
                let name = self.ident()?;
                self.expect_sym("=")?;
                let body = self.expr()?;
                Ok(Decl::Const(ConstDecl { name, body, pos }))
            }
        }
    }

    fn pattern(&mut self) -> Result<Pattern> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Pattern::Var(Name::new(&s)))
            }
            Tok::Sym("_") => {
                self.bump();
                Ok(Pattern::Wild)
            }
            Tok::Sym("(") => {
                self.bump();
                if self.is_sym(")") {
                    self.bump();
                    return Ok(Pattern::Unit);
                }
                let mut ps = vec![self.pattern()?];
                while self.is_sym(",") {
                    self.bump();
                    ps.push(self.pattern()?);
                }
                self.expect_sym(")")?;
                Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Pattern::Tuple(ps) })
            }
            t => self.fail(format!("expected a pattern, found {}", Self::describe(&t))),
        }
    }

    /// Full expression, including a trailing `where rec` block.
    fn expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let body = self.expr_no_where()?;
        if self.is_kw("where") {
            self.bump();
            self.expect_kw("rec")?;
            let (inits, eqs) = self.equations()?;
            return Ok(Expr::new(
                pos,
                ExprKind::WhereRec {
                    body: Box::new(body),
                    inits,
                    eqs,
                },
            ));
        }
        Ok(body)
    }

    fn equations(&mut self) -> Result<(Vec<Init>, Vec<Equation>)> {
        let mut inits = Vec::new();
        let mut eqs = Vec::new();
        loop {
            let pos = self.pos();
            if self.is_kw("init") {
                self.bump();
                let name = self.ident()?;
                self.expect_sym("=")?;
                let value = self.expr_no_where()?;
                inits.push(Init { name, value, pos });
            } else {
                let pat = self.pattern()?;
                self.expect_sym("=")?;
                let expr = self.expr_no_where()?;
                eqs.push(Equation { pat, expr, pos });
            }
            if self.is_kw("and") {
                self.bump();
            } else {
                break;
            }
        }
        Ok((inits, eqs))
    }

    fn expr_no_where(&mut self) -> Result<Expr> {
        let pos = self.pos();
        if self.is_kw("present") {
            self.bump();
            let cond = self.or_expr()?;
            self.expect_sym("->")?;
            let then_ = self.arrow_expr()?;
            self.expect_kw("else")?;
            let else_ = self.expr_no_where()?;
            return Ok(Expr::new(
                pos,
                ExprKind::Present {
                    cond: Box::new(cond),
                    then_: Box::new(then_),
                    else_: Box::new(else_),
                },
            ));
        }
        if self.is_kw("reset") {
            self.bump();
            let body = self.expr_no_where()?;
            self.expect_kw("every")?;
            let cond = self.arrow_expr()?;
            return Ok(Expr::new(
                pos,
                ExprKind::Reset {
                    body: Box::new(body),
                    cond: Box::new(cond),
                },
            ));
        }
        self.arrow_expr()
    }

    fn arrow_expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        if self.is_kw("if") {
            self.bump();
            let c = self.expr_no_where()?;
            self.expect_kw("then")?;
            let t = self.expr_no_where()?;
            self.expect_kw("else")?;
            let e = self.expr_no_where()?;
            return Ok(Expr::new(pos, ExprKind::If(Box::new(c), Box::new(t), Box::new(e))));
        }
        let lhs = self.or_expr()?;
        if self.is_sym("->") {
            self.bump();
            let rhs = self.expr_no_where()?;
            return Ok(Expr::new(pos, ExprKind::Arrow(Box::new(lhs), Box::new(rhs))));
        }
        if self.is_kw("fby") {
            self.bump();
            let rhs = self.expr_no_where()?;
            let rpos = rhs.pos;
            let pre = Expr::new(rpos, ExprKind::Pre(Box::new(rhs)));
            return Ok(Expr::new(pos, ExprKind::Arrow(Box::new(lhs), Box::new(pre))));
        }
        Ok(lhs)
    }

    fn binary(&mut self, pos: Pos, op: Op, a: Expr, b: Expr) -> Expr {
        let arg = Expr::new(pos, ExprKind::Tuple(vec![a, b]));
        Expr::new(pos, ExprKind::OpApp(op, Box::new(arg)))
    }

    fn or_expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let mut lhs = self.and_expr()?;
        while self.is_sym("||") {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = self.binary(pos, Op::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let mut lhs = self.cmp_expr()?;
        while self.is_sym("&&") {
            self.bump();
            let rhs = self.cmp_expr()?;
            lhs = self.binary(pos, Op::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Sym("<") => Op::Lt,
            Tok::Sym("<=") => Op::Le,
            Tok::Sym(">") => Op::Gt,
            Tok::Sym(">=") => Op::Ge,
            Tok::Sym("=") | Tok::Sym("==") => Op::Eq,
            Tok::Sym("<>") | Tok::Sym("!=") => Op::Ne,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add_expr()?;
        Ok(self.binary(pos, op, lhs, rhs))
    }

    fn add_expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") | Tok::Sym("+.") => Op::Add,
                Tok::Sym("-") | Tok::Sym("-.") => Op::Sub,
                Tok::Sym("+@") => Op::VAdd,
                Tok::Sym("-@") => Op::VSub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = self.binary(pos, op, lhs, rhs);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let mut lhs = self.pow_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") | Tok::Sym("*.") => Op::Mul,
                Tok::Sym("/") | Tok::Sym("/.") => Op::Div,
                Tok::Sym("*@") => Op::MatMul,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.pow_expr()?;
            lhs = self.binary(pos, op, lhs, rhs);
        }
    }

    fn pow_expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let lhs = self.unary_expr()?;
        if self.is_sym("**") {
            self.bump();
            let rhs = self.pow_expr()?;
            return Ok(self.binary(pos, Op::Pow, lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        if self.is_sym("-") || self.is_sym("-.") {
            self.bump();
            let e = self.unary_expr()?;
            return Ok(Expr::new(pos, ExprKind::OpApp(Op::Neg, Box::new(e))));
        }
        self.app_expr()
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Int(_) | Tok::Float(_) | Tok::Kw("true") | Tok::Kw("false") | Tok::Sym("(")
        )
    }

    fn app_expr(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Kw("pre") => {
                self.bump();
                let e = self.atom()?;
                Ok(Expr::new(pos, ExprKind::Pre(Box::new(e))))
            }
            Tok::Kw("last") => {
                self.bump();
                let x = self.ident()?;
                Ok(Expr::new(pos, ExprKind::Last(x)))
            }
            Tok::Kw("sample") => {
                self.bump();
                let e = self.atom()?;
                Ok(Expr::new(pos, ExprKind::Sample(Box::new(e))))
            }
            Tok::Kw("factor") => {
                self.bump();
                let e = self.atom()?;
                Ok(Expr::new(pos, ExprKind::Factor(Box::new(e))))
            }
            Tok::Kw("observe") => {
                self.bump();
                let e = self.atom()?;
                match e.kind {
                    ExprKind::Tuple(mut es) if es.len() == 2 => {
                        let v = es.pop().unwrap();
                        let d = es.pop().unwrap();
                        Ok(Expr::new(pos, ExprKind::Observe(Box::new(d), Box::new(v))))
                    }
                    _ => self.fail("observe expects a pair (distribution, value)"),
                }
            }
            Tok::Kw("infer") => {
                self.bump();
                let count = match self.peek().clone() {
                    Tok::Int(n) if n > 0 && n <= u32::MAX as i64 => {
                        self.bump();
                        Some(n as u32)
                    }
                    Tok::Int(_) => return self.fail("infer expects a positive particle count"),
                    _ => None,
                };
                let e = self.app_expr()?;
                Ok(Expr::new(pos, ExprKind::Infer(count, Box::new(e))))
            }
            Tok::Ident(s) => {
                if let Tok::Ident(_) | Tok::Int(_) | Tok::Float(_) | Tok::Kw("true") | Tok::Kw("false") | Tok::Sym("(") =
                    self.peek_at(1)
                {
                    self.bump();
                    let mut args = Vec::new();
                    while self.starts_atom() {
                        args.push(self.atom()?);
                    }
                    return Ok(Expr::new(pos, ExprKind::Apply(Name::new(&s), args)));
                }
                self.atom()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(s) => Ok(Expr::new(pos, ExprKind::Var(Name::new(&s)))),
            Tok::Int(n) => Ok(Expr::new(pos, ExprKind::Const(Literal::Int(n)))),
            Tok::Float(x) => Ok(Expr::new(pos, ExprKind::Const(Literal::Float(x)))),
            Tok::Kw("true") => Ok(Expr::new(pos, ExprKind::Const(Literal::Bool(true)))),
            Tok::Kw("false") => Ok(Expr::new(pos, ExprKind::Const(Literal::Bool(false)))),
            Tok::Sym("(") => {
                if self.is_sym(")") {
                    self.bump();
                    return Ok(Expr::new(pos, ExprKind::Const(Literal::Unit)));
                }
                let mut es = vec![self.expr()?];
                while self.is_sym(",") {
                    self.bump();
                    es.push(self.expr()?);
                }
                self.expect_sym(")")?;
                Ok(if es.len() == 1 {
                    es.pop().unwrap()
                } else {
                    Expr::new(pos, ExprKind::Tuple(es))
                })
            }
            t => {
                self.at -= 1;
                self.fail(format!("unexpected {}", Self::describe(&t)))
            }
        }
    }
}

/// Resolves applications into operators or node calls, and checks that every
/// name is bound and every top-level name is unique.
fn resolve(prog: &mut Program, globals: &[Name]) -> Result<()> {
    let mut top: HashSet<Name> = HashSet::new();
    let mut nodes: HashSet<Name> = HashSet::new();
    let mut consts: Vec<Name> = globals.to_vec();
    for d in &mut prog.decls {
        let (name, pos) = match d {
            Decl::Node(n) => (n.name, n.pos),
            Decl::Const(c) => (c.name, c.pos),
        };
        if !top.insert(name) {
            let _ = pos;
            return Err(Error::Duplicate(name.to_string()));
        }
        match d {
            Decl::Node(n) => {
                let mut scope = consts.clone();
                n.param.names(&mut scope);
                resolve_expr(&mut n.body, &mut scope, &nodes)?;
                nodes.insert(n.name);
            }
            Decl::Const(c) => {
                let mut scope = consts.clone();
                resolve_expr(&mut c.body, &mut scope, &nodes)?;
                consts.push(c.name);
            }
        }
    }
    Ok(())
}

fn unbound(what: &'static str, name: Name, pos: Pos) -> Error {
    Error::Unbound {
        what,
        name: name.to_string(),
        line: pos.line,
        col: pos.col,
    }
}

fn resolve_expr(e: &mut Expr, scope: &mut Vec<Name>, nodes: &HashSet<Name>) -> Result<()> {
    let pos = e.pos;
    match &mut e.kind {
        ExprKind::Var(x) => {
            if !scope.contains(x) {
                return Err(unbound("variable", *x, pos));
            }
        }
        ExprKind::Last(x) => {
            if !scope.contains(x) {
                return Err(unbound("variable", *x, pos));
            }
        }
        ExprKind::Apply(f, args) => {
            let f = *f;
            let mut args = std::mem::take(args);
            for a in &mut args {
                resolve_expr(a, scope, nodes)?;
            }
            let arg = if args.len() == 1 {
                args.pop().unwrap()
            } else {
                Expr::new(pos, ExprKind::Tuple(args))
            };
            e.kind = if let Some(op) = Op::from_name(f.as_str()) {
                ExprKind::OpApp(op, Box::new(arg))
            } else if nodes.contains(&f) {
                ExprKind::Call(f, Box::new(arg))
            } else {
                return Err(unbound("function", f, pos));
            };
        }
        ExprKind::WhereRec { body, inits, eqs } => {
            let mark = scope.len();
            for eq in eqs.iter() {
                eq.pat.names(scope);
            }
            for i in inits.iter() {
                if !scope[mark..].contains(&i.name) {
                    scope.push(i.name);
                }
            }
            for i in inits.iter_mut() {
                resolve_expr(&mut i.value, scope, nodes)?;
            }
            for eq in eqs.iter_mut() {
                resolve_expr(&mut eq.expr, scope, nodes)?;
            }
            resolve_expr(body, scope, nodes)?;
            scope.truncate(mark);
        }
        _ => {
            for c in e.children_mut() {
                resolve_expr(c, scope, nodes)?;
            }
        }
    }
    Ok(())
}
