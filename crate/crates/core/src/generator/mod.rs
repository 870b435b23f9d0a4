//! Synthetic cascade generation.
//!
//! Ground-truth embeddings are drawn from Beta priors, item topics from a
//! Dirichlet, and every item spreads from a uniformly chosen seed in
//! discrete rounds. A node that has not seen the item and follows at least
//! one node activated in the previous round is exposed exactly once, by one
//! of those nodes picked uniformly. It then adopts when it is interested in
//! a topic drawn from the item and agrees with its exposer on that axis.

pub mod sampling;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::cascade::{Activation, ActivationLog, ItemId};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::model::{align, EmbeddingTable, ItemTopics};
use crate::rng::{derive_seed, domain, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphSpec {
    Complete { n: usize },
    BarabasiAlbert { n: usize, m: usize },
}

impl GraphSpec {
    pub fn build(&self, seed: u64) -> Result<DirectedGraph> {
        match *self {
            GraphSpec::Complete { n } => DirectedGraph::complete(n),
            GraphSpec::BarabasiAlbert { n, m } => {
                DirectedGraph::barabasi_albert(n, m, derive_seed(seed, &[domain::GRAPH]))
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            GraphSpec::Complete { n } | GraphSpec::BarabasiAlbert { n, .. } => n,
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Complete { n } => write!(f, "complete:{n}"),
            GraphSpec::BarabasiAlbert { n, m } => write!(f, "ba:{n}:{m}"),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    /// `complete:N` or `ba:N:M`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |x: &str| {
            x.parse::<usize>()
                .map_err(|_| Error::Validation(format!("bad graph spec {s:?}: {x:?} is not a count")))
        };
        match parts.as_slice() {
            ["complete", n] => Ok(GraphSpec::Complete { n: num(n)? }),
            ["ba", n, m] => Ok(GraphSpec::BarabasiAlbert { n: num(n)?, m: num(m)? }),
            _ => Err(Error::Validation(format!(
                "bad graph spec {s:?}, expected complete:N or ba:N:M"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub topics: usize,
    /// Polarities are drawn from `Beta(1/p, 1/p)`.
    pub polarization: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Dirichlet concentration, one entry per topic.
    pub q: Vec<f64>,
    pub n_items: usize,
    pub graph: GraphSpec,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            topics: 4,
            polarization: 4.0,
            alpha: 0.9,
            beta: 0.1,
            q: vec![0.125; 4],
            n_items: 10_000,
            graph: GraphSpec::Complete { n: 100 },
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} must be positive, got {x}")))
            }
        };
        if self.topics == 0 {
            return Err(Error::Validation("topics must be >= 1".into()));
        }
        positive("polarization", self.polarization)?;
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        if self.q.len() != self.topics {
            return Err(Error::Shape {
                expected: self.topics,
                got: self.q.len(),
            });
        }
        for &q in &self.q {
            positive("q", q)?;
        }
        if self.n_items == 0 {
            return Err(Error::Validation("n_items must be >= 1".into()));
        }
        if self.graph.node_count() == 0 {
            return Err(Error::Validation("graph must have at least one node".into()));
        }
        Ok(())
    }
}

/// Interests `~ Beta(alpha, beta)` and polarities `~ Beta(1/p, 1/p)`, i.i.d.
pub fn draw_embeddings<R: Rng + ?Sized>(cfg: &GenConfig, n_nodes: usize, rng: &mut R) -> EmbeddingTable {
    let k = cfg.topics;
    let mut theta = Vec::with_capacity(n_nodes * k);
    let mut phi = Vec::with_capacity(n_nodes * k);
    let shape = 1.0 / cfg.polarization;
    for _ in 0..n_nodes * k {
        theta.push(sampling::beta(cfg.alpha, cfg.beta, rng));
        phi.push(sampling::beta(shape, shape, rng));
    }
    EmbeddingTable::new(k, theta, phi).expect("beta variates lie in [0, 1]")
}

pub fn draw_item_topics<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> ItemTopics {
    ItemTopics::new(sampling::dirichlet(&cfg.q, rng)).expect("dirichlet variate on the simplex")
}

/// One adoption, with the predecessor that exposed the node (`None` for the seed).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Adoption {
    pub t: u32,
    pub node: NodeId,
    pub via: Option<NodeId>,
}

fn sample_topic<R: Rng + ?Sized>(gamma: &[f64], rng: &mut R) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &g) in gamma.iter().enumerate() {
        acc += g;
        if r < acc {
            return k;
        }
    }
    // rounding left r above the final partial sum
    gamma.iter().rposition(|&g| g > 0.0).unwrap_or(gamma.len() - 1)
}

/// Spreads one item over `graph` from a uniformly drawn seed.
pub fn simulate_cascade<R: Rng + ?Sized>(
    graph: &DirectedGraph,
    gamma: &ItemTopics,
    emb: &EmbeddingTable,
    rng: &mut R,
) -> Vec<Adoption> {
    let n = graph.node_count();
    assert!(n > 0, "cannot simulate on an empty graph");
    let g = gamma.gamma();
    let mut seen = vec![false; n];
    let mut newly = vec![false; n];
    let seed = NodeId::from(rng.random_range(0..n));
    seen[seed.index()] = true;
    let mut out = vec![Adoption { t: 0, node: seed, via: None }];
    let mut frontier = vec![seed];
    let mut candidates: Vec<NodeId> = Vec::new();
    let mut exposers: Vec<NodeId> = Vec::new();
    let mut t = 0u32;
    while !frontier.is_empty() {
        t += 1;
        for &v in &frontier {
            newly[v.index()] = true;
        }
        candidates.clear();
        for &v in &frontier {
            candidates.extend(graph.followers(v).iter().filter(|u| !seen[u.index()]));
        }
        candidates.sort_unstable();
        candidates.dedup();
        let mut next = Vec::new();
        for &u in &candidates {
            seen[u.index()] = true;
            exposers.clear();
            exposers.extend(graph.predecessors(u).iter().filter(|v| newly[v.index()]));
            let v = exposers[rng.random_range(0..exposers.len())];
            let k = sample_topic(g, rng);
            if rng.random::<f64>() >= emb.theta(u)[k] {
                continue;
            }
            // both leanings equal: the alignment event has probability align(phi_u, phi_v)
            if rng.random::<f64>() < align(emb.phi(u)[k], emb.phi(v)[k]) {
                out.push(Adoption { t, node: u, via: Some(v) });
                next.push(u);
            }
        }
        for &v in &frontier {
            newly[v.index()] = false;
        }
        frontier = next;
    }
    out
}

/// A generated dataset together with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub graph: DirectedGraph,
    pub truth: EmbeddingTable,
    pub items: Vec<ItemTopics>,
    pub log: ActivationLog,
    /// Exposer of every activation, aligned with `log.entries()`.
    pub via: Vec<Option<NodeId>>,
}

impl Dataset {
    /// Items whose seed never propagated.
    pub fn singleton_items(&self) -> Vec<ItemId> {
        (0..self.items.len())
            .map(ItemId::from)
            .filter(|&i| self.log.cascade(i).len() == 1)
            .collect()
    }
}

/// Generates `cfg.n_items` cascades. Item `i` uses its own RNG stream, so the
/// output does not depend on how items are scheduled across threads.
pub fn generate_dataset(cfg: &GenConfig) -> Result<Dataset> {
    cfg.validate()?;
    let graph = cfg.graph.build(cfg.seed)?;
    let truth = draw_embeddings(cfg, graph.node_count(), &mut stream(cfg.seed, &[domain::EMBEDDINGS], 0));
    generate_with_truth(cfg, graph, truth)
}

/// Like [`generate_dataset`] but with caller-supplied graph and embeddings.
pub fn generate_with_truth(cfg: &GenConfig, graph: DirectedGraph, truth: EmbeddingTable) -> Result<Dataset> {
    cfg.validate()?;
    if truth.node_count() != graph.node_count() {
        return Err(Error::Shape {
            expected: graph.node_count(),
            got: truth.node_count(),
        });
    }
    if truth.k() != cfg.topics {
        return Err(Error::Shape {
            expected: cfg.topics,
            got: truth.k(),
        });
    }
    let per_item: Vec<(ItemTopics, Vec<Adoption>)> = (0..cfg.n_items)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, &[domain::ITEMS], i as u64);
            let gamma = draw_item_topics(cfg, &mut rng);
            let cascade = simulate_cascade(&graph, &gamma, &truth, &mut rng);
            (gamma, cascade)
        })
        .collect();
    let mut items = Vec::with_capacity(cfg.n_items);
    let mut entries = Vec::new();
    let mut via = Vec::new();
    for (i, (gamma, cascade)) in per_item.into_iter().enumerate() {
        items.push(gamma);
        for a in cascade {
            entries.push(Activation {
                t: a.t,
                item: ItemId::from(i),
                node: a.node,
            });
            via.push(a.via);
        }
    }
    // entries are already grouped by item and ordered by round
    let log = ActivationLog::new(entries, cfg.n_items)?;
    Ok(Dataset {
        graph,
        truth,
        items,
        log,
        via,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(n: usize, k: usize, items: usize) -> GenConfig {
        GenConfig {
            topics: k,
            q: vec![0.125; k],
            n_items: items,
            graph: GraphSpec::Complete { n },
            ..GenConfig::default()
        }
    }

    #[test]
    fn graph_spec_parsing() {
        assert_eq!("complete:100".parse::<GraphSpec>().unwrap(), GraphSpec::Complete { n: 100 });
        assert_eq!("ba:100:10".parse::<GraphSpec>().unwrap(), GraphSpec::BarabasiAlbert { n: 100, m: 10 });
        assert!("ba:100".parse::<GraphSpec>().is_err());
        assert!("ring:5".parse::<GraphSpec>().is_err());
        assert_eq!(GraphSpec::BarabasiAlbert { n: 3, m: 1 }.to_string(), "ba:3:1");
    }

    #[test]
    fn config_validation() {
        assert!(GenConfig::default().validate().is_ok());
        assert!(GenConfig { n_items: 0, ..GenConfig::default() }.validate().is_err());
        assert!(GenConfig { polarization: 0.0, ..GenConfig::default() }.validate().is_err());
        assert!(GenConfig { q: vec![0.1; 3], ..GenConfig::default() }.validate().is_err());
    }

    #[test]
    fn interest_prior_mass_above_half() {
        let c = GenConfig::default();
        let emb = draw_embeddings(&c, 25_000, &mut ChaCha8Rng::seed_from_u64(1));
        let frac = emb.theta_all().iter().filter(|&&t| t > 0.5).count() as f64 / emb.theta_all().len() as f64;
        assert!((frac - 0.92).abs() <= 0.01, "{frac}");
    }

    #[test]
    fn uniform_polarity_when_p_is_one() {
        let c = GenConfig { polarization: 1.0, ..GenConfig::default() };
        let emb = draw_embeddings(&c, 25_000, &mut ChaCha8Rng::seed_from_u64(2));
        let mean = emb.phi_all().iter().sum::<f64>() / emb.phi_all().len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn single_topic_items() {
        let c = cfg(5, 1, 1);
        assert_eq!(draw_item_topics(&c, &mut ChaCha8Rng::seed_from_u64(0)).gamma(), &[1.0]);
    }

    #[test]
    fn closed_interest_gate_keeps_seed_only() {
        let g = DirectedGraph::complete(20).unwrap();
        let emb = EmbeddingTable::filled(20, 2, 0.0, 0.8).unwrap();
        let gamma = ItemTopics::new(vec![0.5, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            assert_eq!(simulate_cascade(&g, &gamma, &emb, &mut rng).len(), 1);
        }
    }

    #[test]
    fn full_adoption_in_one_round() {
        let g = DirectedGraph::complete(30).unwrap();
        let emb = EmbeddingTable::filled(30, 1, 1.0, 1.0).unwrap();
        let gamma = ItemTopics::new(vec![1.0]).unwrap();
        let c = simulate_cascade(&g, &gamma, &emb, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(c.len(), 30);
        assert!(c[1..].iter().all(|a| a.t == 1 && a.via == Some(c[0].node)));
    }

    #[test]
    fn neutral_polarities_adopt_half_the_time() {
        // align(0.5, 0.5) = 0.5: 10^4 cascades over 99 exposed nodes each
        let g = DirectedGraph::complete(100).unwrap();
        let emb = EmbeddingTable::filled(100, 1, 1.0, 0.5).unwrap();
        let gamma = ItemTopics::new(vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let trials = 10_000;
        let mut adopted = 0usize;
        for _ in 0..trials {
            adopted += simulate_cascade(&g, &gamma, &emb, &mut rng).len() - 1;
        }
        let frac = adopted as f64 / (trials * 99) as f64;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn dataset_count_and_determinism() {
        let c = cfg(30, 2, 300);
        let a = generate_dataset(&c).unwrap();
        let b = generate_dataset(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.items.len(), 300);
        assert_eq!(a.log.n_items(), 300);
        for i in 0..300 {
            assert_eq!(a.log.cascade(ItemId::from(i))[0].t, 0);
        }
        let mut other = c.clone();
        other.seed = 1;
        assert_ne!(generate_dataset(&other).unwrap().log, a.log);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let c = GenConfig {
            graph: GraphSpec::BarabasiAlbert { n: 40, m: 3 },
            n_items: 200,
            ..GenConfig::default()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| generate_dataset(&c)).unwrap();
        let b = four.install(|| generate_dataset(&c)).unwrap();
        assert_eq!(a, b);
    }
}
