//! Particle-based inference: importance sampling, the particle filter and
//! the delayed-sampling engines all share the cloud representation here.

pub mod engine;
pub mod enumerate;
pub mod importance;
pub mod resample;
pub mod rng;

use std::fmt;
use std::str::FromStr;

use crate::ds::NodeRef;
use crate::error::Error;
use crate::value::Value;

pub use enumerate::exhaustive_enum;
pub use resample::{effective_sample_size, normalized_weights, systematic_indices};

#[derive(Clone, Debug)]
pub struct Particle {
    pub state: Value,
    pub log_weight: f64,
    /// Every node the particle ever created; only filled by naive delayed sampling.
    pub registry: Vec<NodeRef>,
}

impl Particle {
    pub fn new(state: Value) -> Particle {
        Particle { state, log_weight: 0.0, registry: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub struct Cloud {
    pub particles: Vec<Particle>,
    /// Number of steps already taken.
    pub step: u64,
    /// Particle count requested by the program.
    pub n: usize,
}

impl Cloud {
    /// Before the first step the cloud holds a single template particle.
    pub fn initial(state: Value, n: usize) -> Cloud {
        Cloud { particles: vec![Particle::new(state)], step: 0, n: n.max(1) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngineKind {
    /// Importance sampling: weights accumulate, no resampling.
    Is,
    Pf,
    /// Delayed sampling keeping every node in a registry.
    Ds,
    /// Delayed sampling with the graph discarded at the end of each step.
    Bds,
    /// Streaming delayed sampling.
    Sds,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Is => "is",
            EngineKind::Pf => "pf",
            EngineKind::Ds => "ds",
            EngineKind::Bds => "bds",
            EngineKind::Sds => "sds",
        }
    }

    pub fn is_delayed(self) -> bool {
        matches!(self, EngineKind::Ds | EngineKind::Bds | EngineKind::Sds)
    }

    pub fn all() -> [EngineKind; 5] {
        [EngineKind::Is, EngineKind::Pf, EngineKind::Ds, EngineKind::Bds, EngineKind::Sds]
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<EngineKind, Error> {
        EngineKind::all()
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown inference `{}` (expected is, pf, ds, bds or sds)", s)))
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub kind: EngineKind,
    /// Overrides the particle count of top-level `infer`s.
    pub particles: Option<usize>,
    /// Resample only when the effective sample size drops below N/2.
    pub ess_resampling: bool,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { kind: EngineKind::Pf, particles: None, ess_resampling: false, seed: 0 }
    }
}

/// Counters filled by top-level `infer` steps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    /// Log-evidence increment of the last step, summed over top-level `infer`s.
    pub log_evidence: f64,
    /// Outputs whose distribution had no closed form and were sampled instead.
    pub fallbacks: u64,
}
