//! Approximate maximum-likelihood fitting of interests and polarities.
//!
//! Each observed propagation opportunity `(item, v, u)` with `v` active and
//! `u` a follower of `v` is an independent binary example: `y = 1` when `u`
//! adopted after `v`, `y = 0` when `u` never adopted. Parameters are updated
//! one example at a time by ascending the log-likelihood with AdaGrad
//! step sizes, then projected back into `[eps, 1 - eps]`.

use log::{debug, info};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::cascade::{Activation, ActivationLog, CascadeExposures, ItemId};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::model::{
    align, approx_cascade_loglik, pair_prob_unchecked, EmbeddingTable, ExposurePrior, ItemTopics,
    PositiveWeighting,
};
use crate::rng::{domain, stream};
use crate::scalar::{clamp_prob, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr_init: f64,
    pub lr_floor: f64,
    /// Activators sampled per item and epoch.
    pub seed_sample_size: usize,
    /// Negatives drawn per positive, per `(item, activator)`.
    pub negative_ratio: f64,
    pub clamp_eps: f64,
    pub n_restarts: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            lr_init: 0.1,
            lr_floor: 0.01,
            seed_sample_size: 10,
            negative_ratio: 2.0,
            clamp_eps: 1e-4,
            n_restarts: 1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if !(self.lr_floor > 0.0 && self.lr_floor <= self.lr_init && self.lr_init.is_finite()) {
            return bad(format!(
                "need 0 < lr_floor <= lr_init, got lr_floor={} lr_init={}",
                self.lr_floor, self.lr_init
            ));
        }
        if !(self.negative_ratio > 0.0 && self.negative_ratio.is_finite()) {
            return bad(format!("negative_ratio must be positive, got {}", self.negative_ratio));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 0.5) {
            return bad(format!("clamp_eps must lie in (0, 0.5), got {}", self.clamp_eps));
        }
        if self.seed_sample_size == 0 {
            return bad("seed_sample_size must be >= 1".into());
        }
        if self.n_restarts == 0 {
            return bad("n_restarts must be >= 1".into());
        }
        Ok(())
    }

    pub fn sampling(&self) -> PairSampling {
        PairSampling {
            activators: Some(self.seed_sample_size),
            negative_ratio: self.negative_ratio,
        }
    }

    /// Global step size for `epoch` (0-based): linear from `lr_init` to `lr_floor`.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            return self.lr_init;
        }
        let frac = epoch as f64 / (self.epochs - 1) as f64;
        self.lr_init + (self.lr_floor - self.lr_init) * frac
    }
}

/// How propagation pairs are drawn from a cascade.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairSampling {
    /// Activators drawn per item; `None` keeps all of them.
    pub activators: Option<usize>,
    pub negative_ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrainExample {
    pub item: ItemId,
    /// Active node exposing `u`.
    pub v: NodeId,
    /// Follower of `v`.
    pub u: NodeId,
    pub y: bool,
}

const INACTIVE: u32 = u32::MAX;

/// Reusable scratch space for drawing examples from cascades.
pub struct ExampleBuilder<'g> {
    graph: &'g DirectedGraph,
    time: Vec<u32>,
    negatives: Vec<NodeId>,
    positives: usize,
}

impl<'g> ExampleBuilder<'g> {
    pub fn new(graph: &'g DirectedGraph) -> Self {
        ExampleBuilder {
            graph,
            time: vec![INACTIVE; graph.node_count()],
            negatives: Vec::new(),
            positives: 0,
        }
    }

    /// Appends the examples of one cascade to `out`.
    ///
    /// For each sampled activator `v`: every follower that adopted strictly
    /// later is a positive; `round(ratio * positives)` followers that never
    /// adopted are drawn without replacement as negatives.
    pub fn item_examples<R: Rng + ?Sized>(
        &mut self,
        item: ItemId,
        cascade: &[Activation],
        sampling: &PairSampling,
        rng: &mut R,
        out: &mut Vec<TrainExample>,
    ) {
        if cascade.len() < 2 {
            return;
        }
        for a in cascade {
            self.time[a.node.index()] = a.t;
        }
        let chosen: Vec<usize> = match sampling.activators {
            Some(s) if s < cascade.len() => {
                let mut idx = index::sample(rng, cascade.len(), s).into_vec();
                idx.sort_unstable();
                idx
            }
            _ => (0..cascade.len()).collect(),
        };
        for &ai in &chosen {
            let v = cascade[ai].node;
            let tv = cascade[ai].t;
            self.negatives.clear();
            let mut positives = 0usize;
            for &u in self.graph.followers(v) {
                let tu = self.time[u.index()];
                if tu == INACTIVE {
                    self.negatives.push(u);
                } else if tu > tv {
                    out.push(TrainExample { item, v, u, y: true });
                    positives += 1;
                }
            }
            self.positives += positives;
            let wanted = (sampling.negative_ratio * positives as f64).round() as usize;
            let take = wanted.min(self.negatives.len());
            if take > 0 {
                for j in index::sample(rng, self.negatives.len(), take) {
                    out.push(TrainExample {
                        item,
                        v,
                        u: self.negatives[j],
                        y: false,
                    });
                }
            }
        }
        for a in cascade {
            self.time[a.node.index()] = INACTIVE;
        }
    }
}

/// Examples of `items`, each drawn from its own stream
/// `stream(seed, labels, item)`, in item order.
pub fn build_examples(
    graph: &DirectedGraph,
    log: &ActivationLog,
    items: &[ItemId],
    sampling: &PairSampling,
    seed: u64,
    labels: &[u64],
) -> Vec<TrainExample> {
    let mut builder = ExampleBuilder::new(graph);
    let mut out = Vec::new();
    for &i in items {
        let mut rng = stream(seed, labels, i.0 as u64);
        builder.item_examples(i, log.cascade(i), sampling, &mut rng, &mut out);
    }
    out
}

/// Stream labels of the training examples of one epoch.
pub fn epoch_labels(restart: usize, epoch: usize) -> [u64; 3] {
    [domain::EPOCH, restart as u64, epoch as u64]
}

/// Pairwise adoption probability of an example.
pub fn example_prob<T: Scalar>(x: &TrainExample, gamma: &ItemTopics<T>, emb: &EmbeddingTable<T>) -> T {
    pair_prob_unchecked(gamma.gamma(), emb.theta(x.u), emb.phi(x.u), emb.phi(x.v))
}

/// Log-likelihood of one example with the probability clamped away from 0 and 1.
pub fn example_loglik<T: Scalar>(x: &TrainExample, gamma: &ItemTopics<T>, emb: &EmbeddingTable<T>) -> T {
    let p = clamp_prob(example_prob(x, gamma, emb));
    if x.y {
        p.ln()
    } else {
        (T::one() - p).ln()
    }
}

/// Gradient of an example's log-likelihood; nonzero only on `theta[u]`,
/// `phi[u]` and `phi[v]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseGradient<T> {
    pub u: NodeId,
    pub v: NodeId,
    pub theta_u: Vec<T>,
    pub phi_u: Vec<T>,
    pub phi_v: Vec<T>,
}

fn gradient_into<T: Scalar>(
    x: &TrainExample,
    gamma: &[T],
    emb: &EmbeddingTable<T>,
    theta_u: &mut [T],
    phi_u: &mut [T],
    phi_v: &mut [T],
) {
    let tu = emb.theta(x.u);
    let pu = emb.phi(x.u);
    let pv = emb.phi(x.v);
    let p = clamp_prob(pair_prob_unchecked(gamma, tu, pu, pv));
    // d/dP of y ln P + (1 - y) ln(1 - P)
    let coef = if x.y { T::one() / p } else { -T::one() / (T::one() - p) };
    let two = T::lit(2.0);
    for k in 0..gamma.len() {
        let w = coef * gamma[k];
        theta_u[k] = w * align(pu[k], pv[k]);
        phi_u[k] = w * tu[k] * (two * pv[k] - T::one());
        phi_v[k] = w * tu[k] * (two * pu[k] - T::one());
    }
}

pub fn example_gradient<T: Scalar>(
    x: &TrainExample,
    gamma: &ItemTopics<T>,
    emb: &EmbeddingTable<T>,
) -> SparseGradient<T> {
    let k = gamma.k();
    let mut g = SparseGradient {
        u: x.u,
        v: x.v,
        theta_u: vec![T::zero(); k],
        phi_u: vec![T::zero(); k],
        phi_v: vec![T::zero(); k],
    };
    gradient_into(x, gamma.gamma(), emb, &mut g.theta_u, &mut g.phi_u, &mut g.phi_v);
    g
}

/// AdaGrad state: running sums of squared gradients, shaped like the table.
struct AdaGrad<T> {
    k: usize,
    theta: Vec<T>,
    phi: Vec<T>,
}

const ADAGRAD_EPS: f64 = 1e-8;

impl<T: Scalar> AdaGrad<T> {
    fn new(n: usize, k: usize) -> Self {
        AdaGrad {
            k,
            theta: vec![T::zero(); n * k],
            phi: vec![T::zero(); n * k],
        }
    }

    #[inline]
    fn step(acc: &mut [T], params: &mut [T], grad: &[T], lr: T, lo: T, hi: T) {
        let eps = T::lit(ADAGRAD_EPS);
        for k in 0..grad.len() {
            let g = grad[k];
            if g == T::zero() {
                continue;
            }
            acc[k] += g * g;
            let w = params[k] + lr * g / (acc[k].sqrt() + eps);
            params[k] = w.max(lo).min(hi);
        }
    }

    fn rows(&mut self, u: NodeId) -> (&mut [T], &mut [T]) {
        let r = u.index() * self.k..(u.index() + 1) * self.k;
        (&mut self.theta[r.clone()], &mut self.phi[r])
    }
}

/// Objective recorded after every epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub restart: usize,
    pub epoch: usize,
    pub learning_rate: f64,
    pub examples: usize,
    pub positives: usize,
    /// Mean example log-likelihood of this epoch's examples under the
    /// parameters reached at the end of the epoch.
    pub mean_loglik: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartRecord {
    pub restart: usize,
    pub final_mean_loglik: f64,
    /// Factorized log-likelihood over all exposure pairs of the training
    /// items; used to pick the best restart.
    pub train_loglik: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
    pub restarts: Vec<RestartRecord>,
    pub best_restart: usize,
}

/// Single-writer trainer over a fixed set of training items.
pub struct Trainer<'a, T> {
    graph: &'a DirectedGraph,
    items: &'a [ItemTopics<T>],
    log: &'a ActivationLog,
    train: Vec<ItemId>,
    cfg: TrainConfig,
}

impl<'a, T: Scalar> Trainer<'a, T> {
    pub fn new(
        graph: &'a DirectedGraph,
        items: &'a [ItemTopics<T>],
        log: &'a ActivationLog,
        train: Vec<ItemId>,
        cfg: TrainConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let k = items.first().map(|g| g.k()).ok_or(Error::NoTrainingData)?;
        if let Some(bad) = items.iter().find(|g| g.k() != k) {
            return Err(Error::Shape { expected: k, got: bad.k() });
        }
        if log.n_items() > items.len() {
            return Err(Error::Validation(format!(
                "activation log covers {} items but only {} topic vectors given",
                log.n_items(),
                items.len()
            )));
        }
        if let Some(i) = train.iter().find(|i| i.index() >= items.len()) {
            return Err(Error::Validation(format!("training item {i} out of range")));
        }
        if let Some(n) = log.max_node() {
            if n.index() >= graph.node_count() {
                return Err(Error::Index { index: n.index(), len: graph.node_count() });
            }
        }
        Ok(Trainer { graph, items, log, train, cfg })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    fn k(&self) -> usize {
        self.items[0].k()
    }

    /// Starting point of a restart: every entry `~ Uniform(0.4, 0.6)`.
    pub fn initial_embedding(&self, restart: usize) -> EmbeddingTable<T> {
        let n = self.graph.node_count();
        let k = self.k();
        let mut rng = stream(self.cfg.seed, &[domain::INIT, restart as u64], 0);
        let dist = Uniform::new(0.4f64, 0.6).expect("valid range");
        let theta = (0..n * k).map(|_| T::lit(dist.sample(&mut rng))).collect();
        let phi = (0..n * k).map(|_| T::lit(dist.sample(&mut rng))).collect();
        EmbeddingTable::new(k, theta, phi).expect("initial values inside [0, 1]")
    }

    /// The examples visited in one epoch, in update order.
    pub fn epoch_examples(&self, restart: usize, epoch: usize) -> Vec<TrainExample> {
        build_examples(
            self.graph,
            self.log,
            &self.train,
            &self.cfg.sampling(),
            self.cfg.seed,
            &epoch_labels(restart, epoch),
        )
    }

    /// Runs every restart and returns the one with the highest training
    /// log-likelihood.
    pub fn fit(&self) -> Result<(EmbeddingTable<T>, TrainTrace)> {
        let mut trace = TrainTrace::default();
        let mut best: Option<(f64, EmbeddingTable<T>)> = None;
        for restart in 0..self.cfg.n_restarts {
            let init = self.initial_embedding(restart);
            let (emb, records) = self.run(restart, init)?;
            let final_mean = records.last().map(|r| r.mean_loglik).unwrap_or(f64::NAN);
            trace.epochs.extend(records);
            let train_ll = self.train_loglik(&emb)?;
            info!("restart {restart}: final mean example loglik {final_mean:.6}, training loglik {train_ll:.3}");
            trace.restarts.push(RestartRecord {
                restart,
                final_mean_loglik: final_mean,
                train_loglik: train_ll,
            });
            let better = match &best {
                None => true,
                Some((ll, _)) => train_ll > *ll,
            };
            if better {
                trace.best_restart = restart;
                best = Some((train_ll, emb));
            }
        }
        Ok((best.expect("at least one restart").1, trace))
    }

    /// Trains from `init` for the configured number of epochs.
    pub fn run(&self, restart: usize, mut emb: EmbeddingTable<T>) -> Result<(EmbeddingTable<T>, Vec<EpochRecord>)> {
        let k = self.k();
        if emb.k() != k || emb.node_count() != self.graph.node_count() {
            return Err(Error::Shape {
                expected: self.graph.node_count() * k,
                got: emb.node_count() * emb.k(),
            });
        }
        let lo = T::lit(self.cfg.clamp_eps);
        let hi = T::one() - lo;
        let mut acc = AdaGrad::<T>::new(self.graph.node_count(), k);
        let mut g_theta_u = vec![T::zero(); k];
        let mut g_phi_u = vec![T::zero(); k];
        let mut g_phi_v = vec![T::zero(); k];
        let mut builder = ExampleBuilder::new(self.graph);
        let mut buf = Vec::new();
        let sampling = self.cfg.sampling();
        let mut records = Vec::with_capacity(self.cfg.epochs);
        for epoch in 0..self.cfg.epochs {
            let lr = T::lit(self.cfg.learning_rate(epoch));
            let labels = epoch_labels(restart, epoch);
            let mut count = 0usize;
            builder.positives = 0;
            for &i in &self.train {
                buf.clear();
                let mut rng = stream(self.cfg.seed, &labels, i.0 as u64);
                builder.item_examples(i, self.log.cascade(i), &sampling, &mut rng, &mut buf);
                let gamma = self.items[i.index()].gamma();
                for x in &buf {
                    gradient_into(x, gamma, &emb, &mut g_theta_u, &mut g_phi_u, &mut g_phi_v);
                    {
                        let (acc_theta, acc_phi) = acc.rows(x.u);
                        AdaGrad::step(acc_theta, emb.theta_mut(x.u), &g_theta_u, lr, lo, hi);
                        AdaGrad::step(acc_phi, emb.phi_mut(x.u), &g_phi_u, lr, lo, hi);
                    }
                    let (_, acc_phi) = acc.rows(x.v);
                    AdaGrad::step(acc_phi, emb.phi_mut(x.v), &g_phi_v, lr, lo, hi);
                }
                count += buf.len();
            }
            if count == 0 {
                return Err(Error::NoTrainingData);
            }
            let positives = builder.positives;
            let mean_loglik = self.mean_loglik(&self.epoch_examples(restart, epoch), &emb);
            debug!("restart {restart} epoch {epoch}: lr {:.4} examples {count} mean loglik {mean_loglik:.6}", lr);
            records.push(EpochRecord {
                restart,
                epoch,
                learning_rate: self.cfg.learning_rate(epoch),
                examples: count,
                positives,
                mean_loglik,
            });
        }
        Ok((emb, records))
    }

    /// Mean example log-likelihood, accumulated in f64.
    pub fn mean_loglik(&self, examples: &[TrainExample], emb: &EmbeddingTable<T>) -> f64 {
        if examples.is_empty() {
            return f64::NAN;
        }
        let total: f64 = examples
            .iter()
            .map(|x| example_loglik(x, &self.items[x.item.index()], emb).to_f64().unwrap())
            .sum();
        total / examples.len() as f64
    }

    /// Factorized log-likelihood over every exposure pair of the training items.
    pub fn train_loglik(&self, emb: &EmbeddingTable<T>) -> Result<f64> {
        let mut total = 0.0;
        for &i in &self.train {
            let ex = CascadeExposures::build(self.graph, i, self.log.cascade(i))?;
            let ll = approx_cascade_loglik(
                &ex,
                &self.items[i.index()],
                emb,
                &ExposurePrior::Uniform,
                PositiveWeighting::PerPair,
            )?;
            total += ll.to_f64().unwrap();
        }
        Ok(total)
    }
}

/// Fits on every item of the log.
pub fn fit<T: Scalar>(
    graph: &DirectedGraph,
    items: &[ItemTopics<T>],
    log: &ActivationLog,
    cfg: &TrainConfig,
) -> Result<(EmbeddingTable<T>, TrainTrace)> {
    let all = (0..items.len()).map(ItemId::from).collect();
    Trainer::new(graph, items, log, all, cfg.clone())?.fit()
}

/// Fits on the listed items only.
pub fn fit_items<T: Scalar>(
    graph: &DirectedGraph,
    items: &[ItemTopics<T>],
    log: &ActivationLog,
    train: &[ItemId],
    cfg: &TrainConfig,
) -> Result<(EmbeddingTable<T>, TrainTrace)> {
    Trainer::new(graph, items, log, train.to_vec(), cfg.clone())?.fit()
}
