//! The compiled transition functions against the reference interpreter, and
//! the two printed timelines.

#[path = "common/corpus.rs"]
mod corpus;

use corpus::{both, globals, keys, stream, CORPUS, INTEGR, PRESENT_VS_IF};
use rppl::{compile_source, Value};

#[test]
fn corpus_is_large_enough() {
    assert!(CORPUS.len() >= 10);
}

#[test]
fn compiled_code_agrees_with_the_interpreter() {
    for (i, case) in CORPUS.iter().enumerate() {
        for seed in 0..3 {
            let inputs = stream(case.input, 100, 1000 * i as u64 + seed);
            let (reference, compiled) = both(case.src, case.node, &inputs);
            assert_eq!(keys(&reference), keys(&compiled), "{} (seed {})", case.name, seed);
        }
    }
}

#[test]
fn integr_timeline() {
    let xs = [1.0, 2.0, 1.0, 0.0, -1.0, -1.0, 1.0];
    let inputs: Vec<Value> = xs.iter().map(|&d| Value::pair(Value::Float(0.0), Value::Float(d))).collect();
    let expected = [0.0, 0.2, 0.3, 0.3, 0.2, 0.1, 0.2];
    for src in [INTEGR, CORPUS[2].src] {
        let (reference, compiled) = both(src, "integr", &inputs);
        for (t, e) in expected.iter().enumerate() {
            for out in [&reference, &compiled] {
                let v = out[t].as_f64().unwrap();
                assert!((v - e).abs() < 1e-12, "step {}: {} vs {}", t, v, e);
            }
        }
    }
}

#[test]
fn present_vs_if_timeline() {
    let bs = [true, true, false, true, false, false, true];
    let inputs: Vec<Value> = bs.iter().map(|&b| Value::Bool(b)).collect();
    let (reference, compiled) = both(PRESENT_VS_IF, "present_vs_if", &inputs);
    let o1 = [0, 1, 0, 2, 0, 0, 3];
    let o2 = [0, 1, 0, 3, 0, 0, 6];
    for out in [reference, compiled] {
        let got: Vec<(i64, i64)> = out
            .iter()
            .map(|v| {
                let xs = v.items().unwrap();
                (xs[0].as_int().unwrap(), xs[1].as_int().unwrap())
            })
            .collect();
        let want: Vec<(i64, i64)> = o1.iter().copied().zip(o2.iter().copied()).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn pretty_printed_integr_is_stable() {
    let compiled = compile_source(INTEGR, &globals()).unwrap();
    let text = rppl::muf::pretty::program(&compiled.program);
    let golden = include_str!("golden/integr.muf");
    assert_eq!(text, golden);
}
