//! Shared test oracles.
#![allow(dead_code)]

use ideocascade::trainer::{example_gradient, example_loglik};
use ideocascade::model::{approx_cascade_loglik_parts, exact_cascade_loglik, PositiveWeighting};
use ideocascade::{
    Activation, ActivationLog, CascadeExposures, DirectedGraph, EmbeddingTable, ExposurePrior, ItemId, ItemTopics,
    NodeId, TrainExample,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FLOOR: f64 = 1e-9;

/// `P(u adopts | F)` by summing over the four joint attitudes of `u` and
/// each candidate exposer.
pub fn brute_prob(gamma: &[f64], theta: &[Vec<f64>], phi: &[Vec<f64>], u: usize, f: &[usize]) -> f64 {
    let mut total = 0.0;
    for &v in f {
        let mut pv = 0.0;
        for k in 0..gamma.len() {
            let mut agree = 0.0;
            for a in [0, 1] {
                for b in [0, 1] {
                    let pa = if a == 1 { phi[u][k] } else { 1.0 - phi[u][k] };
                    let pb = if b == 1 { phi[v][k] } else { 1.0 - phi[v][k] };
                    if a == b {
                        agree += pa * pb;
                    }
                }
            }
            pv += gamma[k] * theta[u][k] * agree;
        }
        total += pv / f.len() as f64;
    }
    total.clamp(FLOOR, 1.0 - FLOOR)
}

/// Direct evaluation: every node with at least one strictly earlier active
/// in-neighbor contributes its adoption or non-adoption term.
pub fn brute_loglik(
    edges: &[(usize, usize)],
    n: usize,
    times: &[Option<u32>],
    gamma: &[f64],
    theta: &[Vec<f64>],
    phi: &[Vec<f64>],
) -> f64 {
    let mut ll = 0.0;
    for u in 0..n {
        let f: Vec<usize> = (0..n)
            .filter(|&v| edges.contains(&(v, u)))
            .filter(|&v| match (times[v], times[u]) {
                (Some(tv), Some(tu)) => tv < tu,
                (Some(_), None) => true,
                _ => false,
            })
            .collect();
        if f.is_empty() {
            continue;
        }
        let p = brute_prob(gamma, theta, phi, u, &f);
        ll += if times[u].is_some() { p.ln() } else { (1.0 - p).ln() };
    }
    ll
}

pub fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(0.6) {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn random_topics(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn table(n: usize, k: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let theta = (0..n).map(|_| (0..k).map(|_| rng.random::<f64>()).collect()).collect();
    let phi = (0..n).map(|_| (0..k).map(|_| rng.random::<f64>()).collect()).collect();
    (theta, phi)
}

pub fn exposures(graph: &DirectedGraph, times: &[Option<u32>]) -> CascadeExposures {
    let entries: Vec<Activation> = times
        .iter()
        .enumerate()
        .filter_map(|(u, t)| t.map(|t| Activation { t, item: ItemId(0), node: NodeId::from(u) }))
        .collect();
    let log = ActivationLog::new(entries, 1).unwrap();
    CascadeExposures::build(graph, ItemId(0), log.cascade(ItemId(0))).unwrap()
}

/// Every assignment of "inactive" or a time in `0..n` to each node.
pub fn all_patterns(n: usize) -> Vec<Vec<Option<u32>>> {
    let base = n + 1;
    (0..base.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let d = code % base;
                    code /= base;
                    if d == n {
                        None
                    } else {
                        Some(d as u32)
                    }
                })
                .collect()
        })
        .collect()
}

/// Compares `exact_cascade_loglik` with [`brute_loglik`] on every activation
/// pattern of small graphs (2..=4 nodes, 1..=2 topics). Returns the number
/// of instances and the largest absolute difference.
pub fn oracle_sweep(seed: u64) -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for n in 2..=4 {
        for k in 1..=2 {
            for trial in 0..4 {
                let edges = if trial == 0 {
                    (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect()
                } else {
                    random_graph(n, &mut rng)
                };
                let graph = DirectedGraph::with_node_count(n, edges.iter().copied()).unwrap();
                let gamma = random_topics(k, &mut rng);
                let (theta, phi) = table(n, k, &mut rng);
                let emb = EmbeddingTable::new(k, theta.concat(), phi.concat()).unwrap();
                let topics = ItemTopics::new(gamma.clone()).unwrap();
                for times in all_patterns(n) {
                    let got = exact_cascade_loglik(&exposures(&graph, &times), &topics, &ExposurePrior::Uniform, &emb)
                        .unwrap();
                    let want = brute_loglik(&edges, n, &times, &gamma, &theta, &phi);
                    worst = worst.max((got - want).abs());
                    checked += 1;
                }
            }
        }
    }
    (checked, worst)
}

/// Largest excess of the prior-weighted positive term over the exact
/// positive term across `trials` random cascades (non-positive when the
/// bound holds everywhere).
pub fn jensen_sweep(seed: u64, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let n = rng.random_range(3..=8);
        let k = rng.random_range(1..=3);
        let graph = DirectedGraph::with_node_count(n, random_graph(n, &mut rng)).unwrap();
        let times: Vec<Option<u32>> = (0..n)
            .map(|_| rng.random_bool(0.7).then(|| rng.random_range(0..4)))
            .collect();
        let mut e = exposures(&graph, &times);
        e.inactive.clear();
        let (theta, phi) = table(n, k, &mut rng);
        let emb = EmbeddingTable::new(k, theta.concat(), phi.concat()).unwrap();
        let topics = ItemTopics::new(random_topics(k, &mut rng)).unwrap();
        let prior = ExposurePrior::Uniform;
        let exact = exact_cascade_loglik(&e, &topics, &prior, &emb).unwrap();
        let bound = approx_cascade_loglik_parts(&e, &topics, &emb, &prior, PositiveWeighting::PriorWeighted)
            .unwrap()
            .positive;
        worst = worst.max(bound - exact);
    }
    worst
}

/// Largest relative gap between the analytic example gradient and central
/// differences with step `h`, over `count` random examples. Relative error
/// is measured against `max(|analytic|, |numeric|, 1)`.
pub fn gradient_sweep(seed: u64, count: usize, h: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 6;
    let mut worst = 0.0f64;
    for _ in 0..count {
        let k = rng.random_range(1..=4);
        let theta: Vec<f64> = (0..n * k).map(|_| rng.random_range(0.2..0.95)).collect();
        let phi: Vec<f64> = (0..n * k).map(|_| rng.random_range(0.05..0.95)).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
        let gamma = ItemTopics::normalized(raw).unwrap();
        let u = rng.random_range(0..n);
        let v = (u + rng.random_range(1..n)) % n;
        let x = TrainExample { item: ItemId(0), v: NodeId::from(v), u: NodeId::from(u), y: rng.random_bool(0.5) };
        let emb = EmbeddingTable::new(k, theta.clone(), phi.clone()).unwrap();
        let g = example_gradient(&x, &gamma, &emb);

        let loglik = |theta: &[f64], phi: &[f64]| {
            let e = EmbeddingTable::new(k, theta.to_vec(), phi.to_vec()).unwrap();
            example_loglik(&x, &gamma, &e)
        };
        let mut record = |analytic: f64, numeric: f64| {
            worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0));
        };
        for t in 0..k {
            let idx = u * k + t;
            let (mut up, mut dn) = (theta.clone(), theta.clone());
            up[idx] += h;
            dn[idx] -= h;
            record(g.theta_u[t], (loglik(&up, &phi) - loglik(&dn, &phi)) / (2.0 * h));
            for (node, analytic) in [(u, g.phi_u[t]), (v, g.phi_v[t])] {
                let idx = node * k + t;
                let (mut up, mut dn) = (phi.clone(), phi.clone());
                up[idx] += h;
                dn[idx] -= h;
                record(analytic, (loglik(&theta, &up) - loglik(&theta, &dn)) / (2.0 * h));
            }
        }
    }
    worst
}
