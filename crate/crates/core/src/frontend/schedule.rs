//! Static scheduling of `where rec` blocks.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::frontend::ast::*;
use crate::names::Name;

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledBlock {
    pub inits: Vec<Init>,
    pub eqs: Vec<Equation>,
    pub result: Expr,
}

/// How to break ties between equations that are ready at the same time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Earliest equation in the source first.
    #[default]
    SourceOrder,
    /// Latest equation first; gives a different valid schedule for testing.
    ReverseSourceOrder,
}

/// Names read directly (outside `last`) by `e`, restricted to `defined`.
pub fn direct_reads(e: &Expr, defined: &HashSet<Name>) -> Vec<Name> {
    fn go(e: &Expr, defined: &HashSet<Name>, shadow: &mut Vec<Name>, out: &mut Vec<Name>) {
        match &e.kind {
            ExprKind::Var(x) => {
                if defined.contains(x) && !shadow.contains(x) && !out.contains(x) {
                    out.push(*x);
                }
            }
            ExprKind::WhereRec { body, inits, eqs } => {
                let mark = shadow.len();
                for q in eqs {
                    q.pat.names(shadow);
                }
                shadow.extend(inits.iter().map(|i| i.name));
                for q in eqs {
                    go(&q.expr, defined, shadow, out);
                }
                go(body, defined, shadow, out);
                shadow.truncate(mark);
            }
            _ => {
                for c in e.children() {
                    go(c, defined, shadow, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(e, defined, &mut Vec::new(), &mut out);
    out
}

/// Orders the equations of one block so that every direct read follows the
/// equation it reads.
pub fn schedule(inits: Vec<Init>, eqs: Vec<Equation>, result: Expr) -> Result<ScheduledBlock> {
    schedule_with(inits, eqs, result, TieBreak::SourceOrder)
}

pub fn schedule_with(inits: Vec<Init>, eqs: Vec<Equation>, result: Expr, tie: TieBreak) -> Result<ScheduledBlock> {
    let n = eqs.len();
    let mut owner: Vec<Vec<Name>> = Vec::with_capacity(n);
    let mut defined = HashSet::new();
    for q in &eqs {
        let mut names = Vec::new();
        q.pat.names(&mut names);
        for x in &names {
            if !defined.insert(*x) {
                return Err(Error::Duplicate(x.to_string()));
            }
        }
        owner.push(names);
    }
    let eq_of = |x: Name| owner.iter().position(|ns| ns.contains(&x));
    // deps[j] lists the equations that must run before j.
    let mut indegree = vec![0usize; n];
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, q) in eqs.iter().enumerate() {
        let mut seen = HashSet::new();
        for x in direct_reads(&q.expr, &defined) {
            let i = eq_of(x).expect("defined names have an equation");
            if seen.insert(i) {
                if i == j {
                    return Err(Error::Cycle(x.to_string()));
                }
                indegree[j] += 1;
                users[i].push(j);
            }
        }
    }
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let ready = (0..n).filter(|&i| !done[i] && indegree[i] == 0);
        let next = match tie {
            TieBreak::SourceOrder => ready.min(),
            TieBreak::ReverseSourceOrder => ready.max(),
        };
        let Some(i) = next else {
            let mut stuck: Vec<String> = (0..n)
                .filter(|&i| !done[i])
                .flat_map(|i| owner[i].iter().map(|x| x.to_string()))
                .collect();
            stuck.sort();
            return Err(Error::Cycle(stuck.join(", ")));
        };
        done[i] = true;
        order.push(i);
        for &j in &users[i] {
            indegree[j] -= 1;
        }
    }
    let mut slots: Vec<Option<Equation>> = eqs.into_iter().map(Some).collect();
    let eqs = order.into_iter().map(|i| slots[i].take().unwrap()).collect();
    Ok(ScheduledBlock { inits, eqs, result })
}

/// Schedules every block of the program in place.
pub fn schedule_program(prog: &mut Program, tie: TieBreak) -> Result<()> {
    fn go(e: &mut Expr, tie: TieBreak) -> Result<()> {
        for c in e.children_mut() {
            go(c, tie)?;
        }
        if let ExprKind::WhereRec { body, inits, eqs } = &mut e.kind {
            let dummy = Expr::new(Pos::default(), ExprKind::Const(Literal::Unit));
            let block = schedule_with(
                std::mem::take(inits),
                std::mem::take(eqs),
                std::mem::replace(body.as_mut(), dummy),
                tie,
            )?;
            *inits = block.inits;
            *eqs = block.eqs;
            **body = block.result;
        }
        Ok(())
    }
    for d in &mut prog.decls {
        match d {
            Decl::Node(n) => go(&mut n.body, tie)?,
            Decl::Const(c) => go(&mut c.body, tie)?,
        }
    }
    Ok(())
}
