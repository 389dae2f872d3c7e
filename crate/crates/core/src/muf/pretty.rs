//! Stable textual form of compiled terms.

use std::fmt::Write;

use crate::muf::term::*;

pub fn pattern(p: &MufPattern) -> String {
    match p {
        MufPattern::Var(x) => x.to_string(),
        MufPattern::Wild => "_".into(),
        MufPattern::Tuple(ps) => format!("({})", ps.iter().map(pattern).collect::<Vec<_>>().join(", ")),
    }
}

pub fn term(t: &MufTerm) -> String {
    let mut out = String::new();
    write_term(t, 0, &mut out);
    out
}

fn indent(n: usize, out: &mut String) {
    out.push('\n');
    for _ in 0..n {
        out.push_str("  ");
    }
}

fn write_term(t: &MufTerm, depth: usize, out: &mut String) {
    match t {
        MufTerm::Const(v) => {
            let _ = write!(out, "{}", v);
        }
        MufTerm::Var(x) => out.push_str(x.as_str()),
        MufTerm::Tuple(ts) => {
            out.push('(');
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(t, depth, out);
            }
            out.push(')');
        }
        MufTerm::OpApp(op, a) => {
            let _ = write!(out, "{}", op.symbol());
            if !matches!(**a, MufTerm::Tuple(_)) {
                out.push(' ');
            }
            write_term(a, depth, out);
        }
        MufTerm::App(f, a) => {
            write_term(f, depth, out);
            out.push(' ');
            write_term(a, depth, out);
        }
        MufTerm::If(c, a, b) => {
            out.push_str("if ");
            write_term(c, depth, out);
            indent(depth + 1, out);
            out.push_str("then ");
            write_term(a, depth + 1, out);
            indent(depth + 1, out);
            out.push_str("else ");
            write_term(b, depth + 1, out);
        }
        MufTerm::Let(p, b, body) => {
            let _ = write!(out, "let {} = ", pattern(p));
            write_term(b, depth + 1, out);
            out.push_str(" in");
            indent(depth, out);
            write_term(body, depth, out);
        }
        MufTerm::Fun(p, body) => {
            let _ = write!(out, "fun {} ->", pattern(p));
            indent(depth + 1, out);
            write_term(body, depth + 1, out);
        }
        MufTerm::Sample(a) => {
            out.push_str("sample ");
            write_term(a, depth, out);
        }
        MufTerm::Observe(a, b) => {
            out.push_str("observe (");
            write_term(a, depth, out);
            out.push_str(", ");
            write_term(b, depth, out);
            out.push(')');
        }
        MufTerm::Factor(a) => {
            out.push_str("factor ");
            write_term(a, depth, out);
        }
        MufTerm::Infer { site, model, state } => {
            let _ = write!(out, "infer[{}] (", site);
            write_term(model, depth + 1, out);
            out.push_str(", ");
            write_term(state, depth, out);
            out.push(')');
        }
    }
}

/// Every definition, in declaration order.
pub fn program(p: &MufProgram) -> String {
    let mut out = String::new();
    for (name, t, _) in &p.consts {
        let _ = write!(out, "let {} = ", name);
        write_term(t, 0, &mut out);
        out.push_str("\n\n");
    }
    for name in &p.order {
        let d = &p.defs[name];
        let _ = write!(out, "let {}_init = {}\n", name, d.init);
        let _ = write!(out, "let {}_step = ", name);
        write_term(&d.step, 0, &mut out);
        out.push_str("\n\n");
    }
    out
}
