use crate::error::{Error, Result};
use crate::frontend::ast::Pos;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

const KEYWORDS: &[&str] = &[
    "let", "node", "proba", "where", "rec", "and", "init", "last", "present", "reset", "every", "sample",
    "observe", "factor", "infer", "pre", "if", "then", "else", "true", "false", "fby",
];

// Longest symbols first so that greedy matching picks `->` over `-`.
const SYMBOLS: &[&str] = &[
    "->", "<>", "<=", ">=", "==", "!=", "&&", "||", "+.", "-.", "*.", "/.", "+@", "-@", "*@", "**", "(", ")", ",",
    "=", "<", ">", "+", "-", "*", "/", "_", ";",
];

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    let err = |line: u32, col: u32, msg: String| Error::Syntax { line, col, msg };

    macro_rules! advance {
        ($n:expr) => {{
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            let mut depth = 0;
            loop {
                if i >= chars.len() {
                    return Err(err(l0, c0, "unterminated comment".into()));
                }
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    advance!(2);
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    depth -= 1;
                    advance!(2);
                    if depth == 0 {
                        break;
                    }
                } else {
                    advance!(1);
                }
            }
            continue;
        }
        let pos = Pos { line, col };
        if c.is_ascii_alphabetic() || (c == '_' && chars.get(i + 1).is_some_and(|d| d.is_ascii_alphanumeric() || *d == '_')) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                advance!(1);
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            };
            out.push(Token { tok, pos });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance!(1);
            }
            let mut is_float = false;
            if i < chars.len() && chars[i] == '.' {
                is_float = true;
                advance!(1);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance!(1);
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_float = true;
                    let n = j - i;
                    advance!(n);
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        advance!(1);
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if is_float {
                Tok::Float(
                    text.parse()
                        .map_err(|_| err(pos.line, pos.col, format!("bad float literal `{}`", text)))?,
                )
            } else {
                Tok::Int(
                    text.parse()
                        .map_err(|_| err(pos.line, pos.col, format!("bad integer literal `{}`", text)))?,
                )
            };
            out.push(Token { tok, pos });
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                let n = s.chars().count();
                advance!(n);
                out.push(Token { tok: Tok::Sym(s), pos });
            }
            None => return Err(err(pos.line, pos.col, format!("unexpected character `{}`", c))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}
