//! The handler of importance sampling and the particle filter.

use crate::error::{dist_err, eval_err, Result};
use crate::infer::rng::Rng;
use crate::muf::Handler;
use crate::ops::Op;
use crate::value::Value;

pub struct Importance<'a> {
    pub rng: &'a mut Rng,
    /// Log-weight accumulated since the handler was created.
    pub log_weight: f64,
    pub context: u64,
}

impl<'a> Importance<'a> {
    pub fn new(rng: &'a mut Rng, context: u64) -> Importance<'a> {
        Importance { rng, log_weight: 0.0, context }
    }
}

impl Handler for Importance<'_> {
    fn sample(&mut self, d: Value) -> Result<Value> {
        Ok(d.as_dist()?.draw(&mut *self.rng))
    }

    fn observe(&mut self, d: Value, v: Value) -> Result<()> {
        let d = d.as_dist()?;
        if !d.has_density() {
            return dist_err("observe on a distribution without density");
        }
        self.log_weight += d.log_pdf(&v)?;
        Ok(())
    }

    fn factor(&mut self, w: f64) -> Result<()> {
        self.log_weight += w;
        Ok(())
    }

    fn force(&mut self, v: Value) -> Result<Value> {
        Ok(v)
    }

    fn symbolic_op(&mut self, op: Op, _: Value) -> Result<Value> {
        eval_err(format!("symbolic argument to `{}` outside delayed sampling", op))
    }

    fn context(&self) -> u64 {
        self.context
    }
}
