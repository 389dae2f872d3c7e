use std::collections::HashMap;

use rppl::frontend::{self, TieBreak};
use rppl::{compile_source, compile_with, Error, Name, Value};

fn compile(src: &str) -> Result<rppl::Compiled, Error> {
    compile_source(src, &HashMap::new())
}

#[test]
fn syntax_errors_carry_a_position() {
    match compile("let node f (x) = (x") {
        Err(Error::Syntax { line, .. }) => assert_eq!(line, 1),
        other => panic!("{:?}", other.err()),
    }
    assert!(matches!(compile("let node f x = x +"), Err(Error::Syntax { .. })));
    assert!(matches!(compile("let node = 3"), Err(Error::Syntax { .. })));
}

#[test]
fn let_in_is_not_part_of_the_language() {
    assert!(matches!(compile("let node f (x) = let y = x in y"), Err(Error::Syntax { .. })));
}

#[test]
fn probabilistic_code_needs_infer() {
    for src in [
        "let node f (x) = sample (gaussian (x, 1.))",
        "let node f (x) = observe (gaussian (0., 1.), x)",
        "let node f (x) = factor (x)",
        "let proba m (x) = sample (gaussian (x, 1.))\nlet node f (x) = m (x)",
    ] {
        assert!(matches!(compile(src), Err(Error::Kind { .. })), "{}", src);
    }
    compile("let proba m (x) = sample (gaussian (x, 1.))\nlet node f (x) = infer m (x)").unwrap();
    compile("let proba m (x) = sample (gaussian (x, 1.))\nlet proba n (x) = m (x) + 1.").unwrap();
}

#[test]
fn type_errors() {
    assert!(matches!(compile("let node f (x) = x + true"), Err(Error::Type { .. })));
    assert!(matches!(compile("let node f (x) = if 1 then 2 else 3"), Err(Error::Type { .. })));
    assert!(matches!(compile("let node f (x) = present 1. -> 2 else 3"), Err(Error::Type { .. })));
}

#[test]
fn unbound_and_duplicate_names() {
    assert!(matches!(compile("let node f (x) = z"), Err(Error::Unbound { .. })));
    assert!(matches!(compile("let node f (x) = g (x)"), Err(Error::Unbound { .. })));
    assert!(matches!(compile("let node f (x) = x\nlet node f (y) = y"), Err(Error::Duplicate(_))));
    assert!(matches!(compile("let node f (x) = y where rec y = x and y = 1"), Err(Error::Duplicate(_))));
}

#[test]
fn instantaneous_cycles_are_rejected() {
    assert!(matches!(compile("let node f (x) = y where rec y = y + 1"), Err(Error::Cycle(_))));
    assert!(matches!(compile("let node f (x) = a where rec a = b and b = a"), Err(Error::Cycle(_))));
    // Through a delay the same equations are fine.
    compile("let node f (x) = a where rec a = 0 -> pre b and b = a + 1").unwrap();
}

#[test]
fn scheduling_respects_reads_in_either_tie_break() {
    let src = "let node f (x) = a where rec a = b + 1 and b = c * 2 and c = x";
    for tie in [TieBreak::SourceOrder, TieBreak::ReverseSourceOrder] {
        let c = compile_with(src, &HashMap::new(), tie).unwrap();
        let g = HashMap::new();
        let interp = rppl::muf::Interp::new(&c.typed.program, &g);
        let (out, _) = interp.run(Name::new("f"), &[Value::Int(3), Value::Int(-1)]).unwrap();
        assert_eq!(out[0].as_int().unwrap(), 7);
        assert_eq!(out[1].as_int().unwrap(), -1);
    }
}

#[test]
fn sugar_is_gone_after_desugaring() {
    let prog = frontend::parse("let node f (x) = y where rec y = x -> pre y + x").unwrap();
    let prog = frontend::desugar(prog);
    let node = prog.node("f").unwrap();
    node.body.walk(&mut |e| {
        assert!(
            !matches!(e.kind, frontend::ast::ExprKind::Pre(_) | frontend::ast::ExprKind::Arrow(..)),
            "{:?}",
            e.kind
        );
    });
}

#[test]
fn globals_are_typed_from_their_values() {
    let mut g = HashMap::new();
    g.insert(Name::new("k"), Value::Float(2.0));
    compile_source("let node f (x) = k *. x", &g).unwrap();
    let mut g = HashMap::new();
    g.insert(Name::new("k"), Value::Bool(true));
    assert!(compile_source("let node f (x) = k *. x", &g).is_err());
}

#[test]
fn infer_accepts_a_particle_count() {
    let src = "let proba m (x) = sample (bernoulli (0.5))\nlet node f (x) = infer 7 m (x)";
    compile(src).unwrap();
}

#[test]
fn particle_count_must_be_positive() {
    let src = "let proba m (x) = sample (bernoulli (0.5))\nlet node f (x) = infer 0 m (x)";
    assert!(matches!(compile(src), Err(Error::Syntax { .. })));
}
