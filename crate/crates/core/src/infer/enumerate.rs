//! Exact posterior of small discrete models by enumerating every execution.

use std::collections::BTreeMap;

use crate::dist::{self, Distribution};
use crate::error::{dist_err, eval_err, Error, Result};
use crate::muf::eval::{step_node, Runtime};
use crate::muf::Handler;
use crate::names::Name;
use crate::ops::Op;
use crate::value::Value;

/// Largest number of execution paths explored.
pub const PATH_BUDGET: usize = 100_000;

/// Replays a prefix of choices and records the choice points met past it.
struct Scripted {
    script: Vec<usize>,
    sizes: Vec<usize>,
    pos: usize,
    choice_log_prob: f64,
    log_lik: f64,
}

impl Handler for Scripted {
    fn sample(&mut self, d: Value) -> Result<Value> {
        let support = match d.as_dist()?.finite_support() {
            Some(s) => s,
            None => return Err(Error::Enumeration("sample from a distribution with infinite support".into())),
        };
        if self.pos == self.script.len() {
            self.script.push(0);
            self.sizes.push(support.len());
        }
        let (v, p) = support[self.script[self.pos]].clone();
        self.pos += 1;
        self.choice_log_prob += p.ln();
        Ok(v)
    }

    fn observe(&mut self, d: Value, v: Value) -> Result<()> {
        let d = d.as_dist()?;
        if !d.has_density() {
            return dist_err("observe on a distribution without density");
        }
        self.log_lik += d.log_pdf(&v)?;
        Ok(())
    }

    fn factor(&mut self, w: f64) -> Result<()> {
        self.log_lik += w;
        Ok(())
    }

    fn force(&mut self, v: Value) -> Result<Value> {
        Ok(v)
    }

    fn symbolic_op(&mut self, op: Op, _: Value) -> Result<Value> {
        eval_err(format!("symbolic argument to `{}` during enumeration", op))
    }

    fn context(&self) -> u64 {
        0
    }
}

/// Exact per-step distribution of the outputs of the probabilistic node
/// `node` fed with `inputs`: the filtering posterior at each step.
pub fn exhaustive_enum(rt: &Runtime, node: Name, inputs: &[Value]) -> Result<Vec<Distribution>> {
    let init = match rt.program.defs.get(&node) {
        Some(d) => d.init.clone(),
        None => return eval_err(format!("unknown node `{}`", node)),
    };
    // Per step: key -> (value, unnormalized mass).
    let mut acc: Vec<BTreeMap<String, (Value, f64)>> = vec![BTreeMap::new(); inputs.len()];
    let mut script: Vec<usize> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    let mut paths = 0usize;
    loop {
        paths += 1;
        if paths > PATH_BUDGET {
            return Err(Error::Enumeration(format!("more than {} execution paths", PATH_BUDGET)));
        }
        let mut h = Scripted { script, sizes, pos: 0, choice_log_prob: 0.0, log_lik: 0.0 };
        let mut state = init.clone();
        let mut per_step = Vec::with_capacity(inputs.len());
        for x in inputs {
            let (v, s) = step_node(rt, node, state, x.clone(), &mut h)?;
            state = s;
            per_step.push((v, h.log_lik));
        }
        // Later choices sum out, so each step weighs the whole path's choice
        // probability with the likelihood seen so far.
        for (t, (v, lik)) in per_step.into_iter().enumerate() {
            let w = (h.choice_log_prob + lik).exp();
            let e = acc[t].entry(v.key()).or_insert((v, 0.0));
            e.1 += w;
        }
        script = h.script;
        sizes = h.sizes;
        // Next path: advance the last choice that has alternatives left.
        loop {
            match script.last_mut() {
                None => break,
                Some(k) if *k + 1 < *sizes.last().unwrap() => {
                    *k += 1;
                    break;
                }
                Some(_) => {
                    script.pop();
                    sizes.pop();
                }
            }
        }
        if script.is_empty() {
            break;
        }
    }
    acc.into_iter()
        .map(|m| {
            let entries: Vec<(Value, f64)> = m.into_values().collect();
            if entries.iter().all(|(_, w)| *w == 0.0) {
                return Err(Error::DegenerateCloud);
            }
            dist::categorical(entries)
        })
        .collect()
}
