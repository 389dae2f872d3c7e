//! Small discrete models and their comparison with exact enumeration.

use std::collections::HashMap;

use rppl::infer::exhaustive_enum;
use rppl::muf::{step_node, Deterministic};
use rppl::{load, Distribution, EngineConfig, EngineKind, Name, Value};

/// Coin with a hidden bias class, observed through a noisy sensor.
pub const BIASED_COIN: &str = "
let proba m (y) = b where
  rec init b = sample (bernoulli (0.3))
  and () = observe (bernoulli (if b then 0.8 else 0.2), y)
let node main (y) = infer m (y)
";

/// Two-state hidden Markov model.
pub const HMM: &str = "
let proba m (y) = x where
  rec x = sample (bernoulli (if (true -> pre x) then 0.7 else 0.4))
  and () = observe (bernoulli (if x then 0.9 else 0.25), y)
let node main (y) = infer m (y)
";

/// A die roll observed through a Poisson count.
pub const DIE: &str = "
let proba m (k) = n where
  rec init n = sample (uniform_int (0, 3))
  and () = observe (poisson (float n + 0.5), k)
let node main (k) = infer m (k)
";

/// Pair of dependent choices with a soft constraint.
pub const PAIR: &str = "
let proba m (y) = (a, c) where
  rec a = sample (bernoulli (0.5))
  and c = sample (uniform_int (0, 2))
  and () = factor (if a && y then float c else 0. -. float c)
let node main (y) = infer m (y)
";

pub fn config(kind: EngineKind, n: usize, seed: u64) -> EngineConfig {
    EngineConfig { kind, particles: Some(n), ess_resampling: false, seed }
}

pub fn outputs(src: &str, cfg: EngineConfig, inputs: &[Value]) -> Vec<Value> {
    let rt = load(src, HashMap::new(), cfg).unwrap();
    let main = Name::new("main");
    let mut state = rt.program.defs[&main].init.clone();
    let mut out = Vec::new();
    for x in inputs {
        let (v, s) = step_node(&rt, main, state, x.clone(), &mut Deterministic).unwrap();
        state = s;
        out.push(v);
    }
    out
}

/// Probability of each outcome, keyed by its printed form.
pub fn masses(d: &Distribution) -> HashMap<String, f64> {
    let mut out = HashMap::new();
    for (v, p) in d.finite_support().expect("finite support") {
        *out.entry(v.key()).or_insert(0.0) += p;
    }
    out
}

/// Compares a run with `n` particles against exact enumeration, outcome by
/// outcome, within four Monte Carlo standard errors.
pub fn against_enumeration(src: &str, inputs: &[Value], kind: EngineKind, n: usize) -> Result<(), String> {
    let rt = load(src, HashMap::new(), EngineConfig::default()).map_err(|e| e.to_string())?;
    let exact = exhaustive_enum(&rt, Name::new("m"), inputs).map_err(|e| e.to_string())?;
    let approx = outputs(src, config(kind, n, 11), inputs);
    for (t, (e, a)) in exact.iter().zip(&approx).enumerate() {
        let e = masses(e);
        let a = masses(a.as_dist().map_err(|e| e.to_string())?);
        for (k, p) in &e {
            let q = a.get(k).copied().unwrap_or(0.0);
            let se = (p * (1.0 - p) / n as f64).sqrt().max(1e-4);
            if (p - q).abs() > 4.0 * se {
                return Err(format!("{} step {} outcome {}: exact {} vs {}", kind, t, k, p, q));
            }
        }
        if let Some(k) = a.keys().find(|k| !e.contains_key(*k)) {
            return Err(format!("{} step {}: outcome {} has no exact mass", kind, t, k));
        }
    }
    Ok(())
}

pub fn bools(xs: &[bool]) -> Vec<Value> {
    xs.iter().map(|&b| Value::Bool(b)).collect()
}

