//! Deterministic programs run through the interpreter and the compiled code.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rppl::muf::{step_node, Deterministic, Interp};
use rppl::{compile_source, EngineConfig, Name, Runtime, Value};

pub fn globals() -> HashMap<Name, Value> {
    let mut g = HashMap::new();
    g.insert(Name::new("h"), Value::Float(0.1));
    g.insert(Name::new("rot"), Value::matrix(DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6])));
    g
}

/// Outputs of `node` on `inputs`, through the interpreter and through the
/// compiled code.
pub fn both(src: &str, node: &str, inputs: &[Value]) -> (Vec<Value>, Vec<Value>) {
    let g = globals();
    let compiled = compile_source(src, &g).unwrap_or_else(|e| panic!("{}\n{}", e, src));
    let name = Name::new(node);
    let interp = Interp::new(&compiled.typed.program, &g);
    let (reference, _) = interp.run(name, inputs).unwrap();
    let rt = Runtime::new(compiled.program, g, EngineConfig::default()).unwrap();
    let mut state = rt.program.defs[&name].init.clone();
    let mut out = Vec::with_capacity(inputs.len());
    for x in inputs {
        let (v, s) = step_node(&rt, name, state, x.clone(), &mut Deterministic).unwrap();
        out.push(v);
        state = s;
    }
    (reference, out)
}

pub fn keys(vs: &[Value]) -> Vec<String> {
    vs.iter().map(Value::key).collect()
}

#[derive(Clone, Copy)]
pub enum Input {
    Float,
    Bool,
    Int,
    Vec2,
}

fn random(kind: Input, rng: &mut ChaCha8Rng) -> Value {
    match kind {
        Input::Float => Value::Float(rng.random_range(-5.0..5.0)),
        Input::Bool => Value::Bool(rng.random_bool(0.4)),
        Input::Int => Value::Int(rng.random_range(-3..4)),
        Input::Vec2 => Value::vector(DVector::from_column_slice(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])),
    }
}

pub fn stream(sig: &[Input], steps: usize, seed: u64) -> Vec<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..steps)
        .map(|_| match sig {
            [] => Value::Unit,
            [k] => random(*k, &mut rng),
            ks => Value::tuple(ks.iter().map(|k| random(*k, &mut rng)).collect()),
        })
        .collect()
}

pub const INTEGR: &str = "
let node integr (xo, x') = x where
  rec x = xo -> (pre x + x' * h)
";

pub const PRESENT_VS_IF: &str = "
let node cpt () = o where rec o = 0 -> pre o + 1

let node present_vs_if (b) = (o1, o2) where
  rec o1 = present (b) -> cpt () else 0
  and o2 = if b then cpt () else 0
";

pub struct Case {
    pub name: &'static str,
    pub src: &'static str,
    pub node: &'static str,
    pub input: &'static [Input],
}

pub const CORPUS: &[Case] = &[
    Case { name: "integr", src: INTEGR, node: "integr", input: &[Input::Float, Input::Float] },
    Case { name: "present_vs_if", src: PRESENT_VS_IF, node: "present_vs_if", input: &[Input::Bool] },
    Case {
        name: "integr_kernel",
        src: "
let node integr (xo, x') = x where
  rec init first = true and init x = 0.
  and first = false
  and x = if last first then xo else last x + (x' * h)
",
        node: "integr",
        input: &[Input::Float, Input::Float],
    },
    Case {
        name: "reset_counter",
        src: "
let node cpt () = o where rec o = 0 -> pre o + 1
let node main (r) = reset cpt () every r
",
        node: "main",
        input: &[Input::Bool],
    },
    Case {
        name: "pid",
        src: "
let node integr (xo, x') = x where
  rec x = xo -> (pre x + x' * h)
let node deriv (x) = d where
  rec d = 0. -> (x - pre x) / h
let node pid (target, y) = u where
  rec e = target - y
  and u = 0.5 * e + 0.1 * integr (0., e) + 0.01 * deriv (e)
",
        node: "pid",
        input: &[Input::Float, Input::Float],
    },
    Case {
        name: "fibonacci",
        src: "
let node fib () = a where
  rec a = 0. -> pre b
  and b = 1. -> pre (a + b)
",
        node: "fib",
        input: &[],
    },
    Case {
        name: "swap_tuples",
        src: "
let node swap (x, y) = (p, q) where
  rec (p, q) = (y, x) -> (pre q, pre p)
",
        node: "swap",
        input: &[Input::Int, Input::Int],
    },
    Case {
        name: "rising_edge",
        src: "
let node edge (b) = b && not (false -> pre b)
let node count_edges (b) = n where
  rec n = (if edge (b) then 1 else 0) + (0 -> pre n)
",
        node: "count_edges",
        input: &[Input::Bool],
    },
    Case {
        name: "running_mean",
        src: "
let node mean_of (x) = m where
  rec n = 1. -> pre n + 1.
  and s = x -> pre s + x
  and m = s / n
",
        node: "mean_of",
        input: &[Input::Float],
    },
    Case {
        name: "clamped_walk",
        src: "
let node walk (step) = p where
  rec p = max (-5, min (5, (0 -> pre p) + step))
",
        node: "walk",
        input: &[Input::Int],
    },
    Case {
        name: "rotation",
        src: "
let node spin (kick) = v where
  rec v = kick -> (rot *@ pre v) +@ kick
",
        node: "spin",
        input: &[Input::Vec2],
    },
    Case {
        name: "nested_present",
        src: "
let node cpt () = o where rec o = 0 -> pre o + 1
let node up (s) = o where rec o = s -> pre o + 1.
let node gated (a, b) = (x, y) where
  rec x = present a -> (present b -> cpt () else 100 + cpt ()) else cpt ()
  and y = present b -> up (0.) else up (10.) * 2.
",
        node: "gated",
        input: &[Input::Bool, Input::Bool],
    },
    Case {
        name: "last_and_init",
        src: "
let node acc (x) = y where
  rec init y = 1.
  and y = last y * 0.5 + x
",
        node: "acc",
        input: &[Input::Float],
    },
];

