//! The delayed-sampling graph: conjugate updates, the single marginalized
//! child rule, copies and reclamation.

use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rppl::bench::kalman_oracle;
use rppl::ds::{distribution_of, dump, node_distribution, Conditional, Copier, Family, Graph, NodeRef, Status, SymExpr, Variant};
use rppl::{Distribution, Value};

fn graph(variant: Variant) -> (Graph, Arc<AtomicI64>) {
    let live = Arc::new(AtomicI64::new(0));
    (Graph::new(variant, live.clone()), live)
}

fn rvar(n: &NodeRef) -> Value {
    Value::sym(SymExpr::RVar(n.clone()))
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(3)
}

fn gauss(d: Distribution) -> (f64, f64) {
    match d {
        Distribution::Gaussian(m, v) => (m, v),
        other => panic!("expected a gaussian, got {:?}", other),
    }
}

#[test]
fn beta_bernoulli_updates_are_exact() {
    let (mut g, _) = graph(Variant::Streaming);
    let mut rng = rng();
    let p = g.root(Distribution::Beta(1.0, 1.0)).unwrap();
    for t in 1..=5 {
        let y = g.initialize(Family::Bernoulli, Conditional::BernoulliOfBeta, &p).unwrap();
        g.marginalize(&y, &mut rng).unwrap();
        match node_distribution(&y).unwrap() {
            Distribution::Bernoulli(q) => assert!((q - t as f64 / (t as f64 + 1.0)).abs() < 1e-12),
            other => panic!("{:?}", other),
        }
        g.realize(&y, Value::Bool(true)).unwrap();
        assert_eq!(node_distribution(&p).unwrap(), Distribution::Beta(1.0 + t as f64, 1.0));
    }
}

#[test]
fn asking_for_a_distribution_leaves_the_graph_alone() {
    let (mut g, _) = graph(Variant::Streaming);
    let mut rng = rng();
    let x = g.root(Distribution::Gaussian(0.0, 4.0)).unwrap();
    let cond = Conditional::GaussianOfAffine { a: 2.0, b: 1.0, var: 1.0 };
    let y = g.initialize(Family::Gaussian, cond.clone(), &x).unwrap();
    let z = g.initialize(Family::Gaussian, cond, &y).unwrap();
    let v = Value::tuple(vec![rvar(&x), rvar(&z)]);
    let before = dump(&v);
    let d = distribution_of(&v).unwrap();
    assert_eq!(dump(&v), before);
    match d {
        Distribution::Product(ds) => {
            assert_eq!(ds[0], Distribution::Gaussian(0.0, 4.0));
            // y ~ N(1, 17), z ~ N(3, 69)
            let (m, s) = gauss(ds[1].clone());
            assert!((m - 3.0).abs() < 1e-12 && (s - 69.0).abs() < 1e-12);
        }
        other => panic!("{:?}", other),
    }
    // A realized child seen only through the snapshot does not get folded in.
    g.marginalize(&y, &mut rng).unwrap();
    g.realize(&y, Value::Float(5.0)).unwrap();
    let before = dump(&rvar(&x));
    let (m, s) = gauss(node_distribution(&x).unwrap());
    assert_eq!(dump(&rvar(&x)), before);
    // Posterior of x given 2x + 1 + e = 5 with e ~ N(0, 1).
    assert!((m - 32.0 / 17.0).abs() < 1e-12);
    assert!((s - 4.0 / 17.0).abs() < 1e-12);
}

#[test]
fn a_node_keeps_one_marginalized_child() {
    let (mut g, _) = graph(Variant::Streaming);
    let mut rng = rng();
    let x = g.root(Distribution::Gaussian(0.0, 1.0)).unwrap();
    let cond = Conditional::GaussianOfAffine { a: 1.0, b: 0.0, var: 1.0 };
    let a = g.initialize(Family::Gaussian, cond.clone(), &x).unwrap();
    let b = g.initialize(Family::Gaussian, cond, &x).unwrap();
    g.marginalize(&a, &mut rng).unwrap();
    assert!(matches!(x.status(), Status::Marginalized { child: Some(_), .. }));
    g.marginalize(&b, &mut rng).unwrap();
    // Marginalizing the second child realized the first one on the way.
    assert!(a.is_realized());
    match x.status() {
        Status::Marginalized { child: Some((c, _)), .. } => assert!(c.ptr_eq(&b)),
        other => panic!("{:?}", other),
    }
}

#[test]
fn forcing_samples_the_chain_from_its_tail() {
    let (mut g, _) = graph(Variant::Streaming);
    let mut rng = rng();
    let x = g.root(Distribution::Gaussian(0.0, 1.0)).unwrap();
    let cond = Conditional::GaussianOfAffine { a: 1.0, b: 0.0, var: 1.0 };
    let y = g.initialize(Family::Gaussian, cond.clone(), &x).unwrap();
    let z = g.initialize(Family::Gaussian, cond, &y).unwrap();
    g.marginalize(&z, &mut rng).unwrap();
    let vx = g.force_node(&x, &mut rng).unwrap();
    assert!(x.is_realized() && y.is_realized() && z.is_realized());
    assert_eq!(node_distribution(&x).unwrap(), Distribution::Dirac(vx));
}

#[test]
fn copies_share_nothing() {
    let (mut g, _) = graph(Variant::Streaming);
    let mut rng = rng();
    let p = g.root(Distribution::Beta(2.0, 3.0)).unwrap();
    let y = g.initialize(Family::Bernoulli, Conditional::BernoulliOfBeta, &p).unwrap();
    g.marginalize(&y, &mut rng).unwrap();
    let v = Value::tuple(vec![rvar(&p), rvar(&y)]);
    let original = dump(&v);
    let copy = Copier::new().value(&v);
    assert_eq!(dump(&copy), original);
    let xs = copy.items().unwrap();
    let (cp, cy) = match (&xs[0], &xs[1]) {
        (Value::Sym(a), Value::Sym(b)) => match (&**a, &**b) {
            (SymExpr::RVar(a), SymExpr::RVar(b)) => (a.clone(), b.clone()),
            _ => panic!(),
        },
        _ => panic!(),
    };
    assert!(!cp.ptr_eq(&p) && !cy.ptr_eq(&y));
    g.realize(&cy, Value::Bool(false)).unwrap();
    assert_eq!(node_distribution(&cp).unwrap(), Distribution::Beta(2.0, 4.0));
    assert_eq!(dump(&v), original);
    assert_eq!(node_distribution(&p).unwrap(), Distribution::Beta(2.0, 3.0));
}

/// A random walk observed at every step, built directly on the graph.
fn kalman_chain(variant: Variant, steps: usize) -> (Vec<(f64, f64)>, Vec<i64>) {
    let (mut g, live) = graph(variant);
    let mut rng = rng();
    let obs: Vec<f64> = (0..steps).map(|t| (t as f64 * 0.3).sin() * 3.0).collect();
    let mut x = g.root(Distribution::Gaussian(0.0, 2500.0)).unwrap();
    let mut out = Vec::new();
    let mut counts = Vec::new();
    for (t, y) in obs.iter().enumerate() {
        if t > 0 {
            let next = g
                .initialize(Family::Gaussian, Conditional::GaussianOfAffine { a: 1.0, b: 0.0, var: 1.0 }, &x)
                .unwrap();
            x = next;
        }
        let o = g
            .initialize(Family::Gaussian, Conditional::GaussianOfAffine { a: 1.0, b: 0.0, var: 1.0 }, &x)
            .unwrap();
        g.marginalize(&o, &mut rng).unwrap();
        g.realize(&o, Value::Float(*y)).unwrap();
        drop(o);
        out.push(gauss(node_distribution(&x).unwrap()));
        counts.push(live.load(Ordering::SeqCst));
    }
    (out, counts)
}

#[test]
fn chained_updates_match_the_kalman_filter() {
    let steps = 200;
    let obs: Vec<Option<f64>> = (0..steps).map(|t| Some((t as f64 * 0.3).sin() * 3.0)).collect();
    let oracle = kalman_oracle(0.0, 2500.0, 1.0, 1.0, &obs);
    for variant in [Variant::Streaming, Variant::Naive] {
        let (got, _) = kalman_chain(variant, steps);
        for (t, ((m, v), (om, ov))) in got.iter().zip(&oracle).enumerate() {
            assert!((m - om).abs() <= 1e-9 * om.abs().max(1.0), "step {}: {} vs {}", t, m, om);
            assert!((v - ov).abs() <= 1e-9 * ov.abs(), "step {}: {} vs {}", t, v, ov);
        }
    }
}

#[test]
fn unreachable_nodes_are_reclaimed_only_when_streaming() {
    let (_, streaming) = kalman_chain(Variant::Streaming, 300);
    assert!(streaming.iter().all(|&n| n <= 3), "{:?}", &streaming[..10]);
    let (_, naive) = kalman_chain(Variant::Naive, 300);
    assert!(naive[299] >= 2 * 299);
}
