//! One step of an `infer` instance: run every particle, aggregate their
//! results, then resample.

use rayon::prelude::*;

use crate::dist::{self, log_sum_exp, Distribution};
use crate::ds::{self, Copier, DsHandler, Graph, Variant};
use crate::error::Result;
use crate::infer::importance::Importance;
use crate::infer::resample::{effective_sample_size, normalized_weights, systematic_indices};
use crate::infer::rng::{self, RESAMPLE_STREAM};
use crate::infer::{Cloud, EngineKind, Particle};
use crate::muf::eval::{apply_fun, split_pair, Env, Runtime};
use crate::muf::MufTerm;
use crate::value::Value;

// Below this many particles the thread pool costs more than it saves.
const PARALLEL_THRESHOLD: usize = 8;

struct Stepped {
    particle: Particle,
    value: Value,
    dist: Option<Distribution>,
    fallback: bool,
}

fn step_particle(
    rt: &Runtime,
    site: u32,
    model: &MufTerm,
    src: Particle,
    env: &Env,
    context: u64,
    step: u64,
    i: usize,
) -> Result<Stepped> {
    let cfg = &rt.config;
    let mut rng = rng::stream(cfg.seed, site, context, step, i as u64);
    let inner = rng::context(site, context, step, i as u64);
    let mut env = env.fork();
    let Particle { state, log_weight, registry } = src;
    match cfg.kind {
        EngineKind::Is | EngineKind::Pf => {
            let mut h = Importance::new(&mut rng, inner);
            let out = apply_fun(rt, model, state, &mut env, &mut h)?;
            let (value, state) = split_pair(out)?;
            Ok(Stepped {
                particle: Particle { state, log_weight: log_weight + h.log_weight, registry },
                value,
                dist: None,
                fallback: false,
            })
        }
        EngineKind::Ds | EngineKind::Bds | EngineKind::Sds => {
            let variant = if cfg.kind == EngineKind::Ds { Variant::Naive } else { Variant::Streaming };
            let mut graph = Graph::new(variant, rt.live_nodes.clone());
            graph.registry = registry;
            let mut h = DsHandler::new(graph, &mut rng, inner);
            let out = apply_fun(rt, model, state, &mut env, &mut h)?;
            let (value, state) = split_pair(out)?;
            let (dist, fallback) = ds::output_distribution(&mut h, &value)?;
            let state = if cfg.kind == EngineKind::Bds { h.force_all(&state)? } else { state };
            let delta = h.log_weight;
            Ok(Stepped {
                particle: Particle { state, log_weight: log_weight + delta, registry: h.graph.registry },
                value,
                dist: Some(dist),
                fallback,
            })
        }
    }
}

/// Advances the cloud of the `infer` at `site` by one step. Returns the
/// distribution of the model's result and the next cloud.
pub fn step(
    rt: &Runtime,
    site: u32,
    model: &MufTerm,
    cloud: &Cloud,
    env: &Env,
    context: u64,
) -> Result<(Value, Cloud)> {
    let cfg = &rt.config;
    let n = match cfg.particles {
        Some(k) if context == 0 => k.max(1),
        _ => cloud.n,
    };
    let sources: Vec<Particle> = if cloud.step == 0 {
        vec![cloud.particles[0].clone(); n]
    } else {
        cloud.particles.clone()
    };
    let prior: Vec<f64> = sources.iter().map(|p| p.log_weight).collect();
    let run = |(i, p): (usize, Particle)| step_particle(rt, site, model, p, env, context, cloud.step, i);
    let stepped: Vec<Stepped> = if sources.len() < PARALLEL_THRESHOLD {
        sources.into_iter().enumerate().map(run).collect::<Result<_>>()?
    } else {
        sources.into_par_iter().enumerate().map(run).collect::<Result<_>>()?
    };

    let log_weights: Vec<f64> = stepped.iter().map(|s| s.particle.log_weight).collect();
    let weights = normalized_weights(&log_weights)?;
    let result = if cfg.kind.is_delayed() {
        let comps = stepped.iter().zip(&weights).map(|(s, w)| (s.dist.clone().unwrap(), *w)).collect();
        dist::mixture(comps)?
    } else if stepped.len() == 1 {
        Distribution::Dirac(stepped[0].value.clone())
    } else {
        dist::categorical(stepped.iter().zip(&weights).map(|(s, w)| (s.value.clone(), *w)).collect())?
    };

    if context == 0 {
        let mut stats = rt.stats.lock().unwrap_or_else(|e| e.into_inner());
        stats.log_evidence += log_sum_exp(&log_weights) - log_sum_exp(&prior);
        stats.fallbacks += stepped.iter().filter(|s| s.fallback).count() as u64;
    }

    let resample = match cfg.kind {
        EngineKind::Is => false,
        _ => !cfg.ess_resampling || effective_sample_size(&weights) < n as f64 / 2.0,
    };
    let particles = if resample {
        let mut r = rng::stream(cfg.seed, site, context, cloud.step, RESAMPLE_STREAM);
        let idx = systematic_indices(&weights, n, &mut r);
        let mut slots: Vec<Option<Particle>> = stepped.into_iter().map(|s| Some(s.particle)).collect();
        let mut out: Vec<Particle> = Vec::with_capacity(n);
        let mut last: Option<usize> = None;
        for &i in &idx {
            // Indices are sorted: the first copy takes the original, later
            // copies duplicate it, graph included.
            let p = if last == Some(i) {
                let prev = out.last().unwrap();
                if ds::needs_copy(&prev.state) || !prev.registry.is_empty() {
                    Copier::new().particle(prev)
                } else {
                    prev.clone()
                }
            } else {
                slots[i].take().expect("each ancestor is taken once")
            };
            last = Some(i);
            out.push(Particle { log_weight: 0.0, ..p });
        }
        out
    } else {
        // Keep weights normalized so that they stay in a sane range.
        let total = log_sum_exp(&log_weights);
        stepped
            .into_iter()
            .map(|s| Particle { log_weight: s.particle.log_weight - total, ..s.particle })
            .collect()
    };
    Ok((Value::dist(result), Cloud { particles, step: cloud.step + 1, n }))
}
