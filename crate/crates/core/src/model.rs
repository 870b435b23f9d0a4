//! Activation probability kernel and cascade log-likelihoods.
//!
//! A node `u` exposed to item `i` by an active predecessor `v` adopts it with
//! probability
//!
//! ```text
//! P(u | v, i) = sum_k gamma[i][k] * theta[u][k] * align(phi[u][k], phi[v][k])
//! align(a, b) = a b + (1 - a)(1 - b)
//! ```
//!
//! i.e. a topic is drawn from the item, `u` must care about it, and the two
//! nodes must draw the same leaning on that axis. With several candidate
//! activators the probability is a prior-weighted mixture over them.

use crate::cascade::CascadeExposures;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::scalar::{clamp_prob, Scalar};

/// Topic mixture of one item: non-negative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemTopics<T = f64> {
    gamma: Vec<T>,
}

impl<T: Scalar> ItemTopics<T> {
    /// Validates `gamma` (non-empty, non-negative, sums to 1 within 1e-9).
    pub fn new(gamma: Vec<T>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::Validation("topic vector must have K >= 1 entries".into()));
        }
        if gamma.iter().any(|g| !(*g >= T::zero()) || !g.is_finite()) {
            return Err(Error::Validation("topic weights must be finite and non-negative".into()));
        }
        let sum: T = gamma.iter().copied().sum();
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(gamma.len() as f64 * 4.0));
        if (sum - T::one()).abs() > tol {
            return Err(Error::Validation(format!("topic weights sum to {sum}, expected 1")));
        }
        Ok(ItemTopics { gamma })
    }

    /// Scales non-negative weights to sum to one.
    pub fn normalized(mut gamma: Vec<T>) -> Result<Self> {
        let sum: T = gamma.iter().copied().sum();
        if !(sum > T::zero()) {
            return Err(Error::Validation("topic weights have zero mass".into()));
        }
        gamma.iter_mut().for_each(|g| *g /= sum);
        Self::new(gamma)
    }

    pub fn k(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    pub fn cast<U: Scalar>(&self) -> ItemTopics<U> {
        ItemTopics {
            gamma: self.gamma.iter().map(|g| U::lit(g.to_f64().unwrap())).collect(),
        }
    }
}

/// Per-node interests `theta` and polarities `phi`, both `n x K` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable<T = f64> {
    k: usize,
    theta: Vec<T>,
    phi: Vec<T>,
}

impl<T: Scalar> EmbeddingTable<T> {
    /// Row-major `n x k` matrices. Every entry must lie in `[0, 1]`.
    pub fn new(k: usize, theta: Vec<T>, phi: Vec<T>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Validation("embedding dimension must be >= 1".into()));
        }
        if theta.len() % k != 0 {
            return Err(Error::Shape {
                expected: theta.len() / k * k,
                got: theta.len(),
            });
        }
        if phi.len() != theta.len() {
            return Err(Error::Shape {
                expected: theta.len(),
                got: phi.len(),
            });
        }
        for (name, m) in [("theta", &theta), ("phi", &phi)] {
            if let Some((pos, x)) = m.iter().enumerate().find(|(_, x)| !in_unit(**x)) {
                return Err(Error::Domain(format!(
                    "{name}[{}][{}] = {x} outside [0, 1]",
                    pos / k,
                    pos % k
                )));
            }
        }
        Ok(EmbeddingTable { k, theta, phi })
    }

    /// Table with every entry set to `value`.
    pub fn filled(n: usize, k: usize, theta: T, phi: T) -> Result<Self> {
        Self::new(k, vec![theta; n * k], vec![phi; n * k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.theta.len() / self.k
    }

    #[inline]
    pub fn theta(&self, u: NodeId) -> &[T] {
        &self.theta[u.index() * self.k..(u.index() + 1) * self.k]
    }

    #[inline]
    pub fn phi(&self, u: NodeId) -> &[T] {
        &self.phi[u.index() * self.k..(u.index() + 1) * self.k]
    }

    #[inline]
    pub(crate) fn theta_mut(&mut self, u: NodeId) -> &mut [T] {
        &mut self.theta[u.index() * self.k..(u.index() + 1) * self.k]
    }

    #[inline]
    pub(crate) fn phi_mut(&mut self, u: NodeId) -> &mut [T] {
        &mut self.phi[u.index() * self.k..(u.index() + 1) * self.k]
    }

    pub fn theta_all(&self) -> &[T] {
        &self.theta
    }

    pub fn phi_all(&self) -> &[T] {
        &self.phi
    }

    /// Replaces `phi` by `1 - phi` on `topic` for every node.
    pub fn flip_topic(&mut self, topic: usize) {
        assert!(topic < self.k, "topic {topic} out of range");
        for row in self.phi.chunks_mut(self.k) {
            row[topic] = T::one() - row[topic];
        }
    }

    pub fn cast<U: Scalar>(&self) -> EmbeddingTable<U> {
        let conv = |v: &Vec<T>| v.iter().map(|x| U::lit(x.to_f64().unwrap())).collect();
        EmbeddingTable {
            k: self.k,
            theta: conv(&self.theta),
            phi: conv(&self.phi),
        }
    }
}

#[inline]
fn in_unit<T: Scalar>(x: T) -> bool {
    x >= T::zero() && x <= T::one()
}

/// Weights `pi` over an exposure set.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum ExposurePrior {
    /// `1 / |F|` for every candidate.
    #[default]
    Uniform,
    /// All mass on the earliest activator.
    FirstActivator,
    /// Unnormalized per-node weights, indexed by node id.
    Custom(Vec<f64>),
}

impl ExposurePrior {
    /// Realized weights over `activators` (ordered by activation time).
    pub fn weights<T: Scalar>(&self, activators: &[NodeId]) -> Result<Vec<T>> {
        if activators.is_empty() {
            return Err(Error::Precondition("empty activator set".into()));
        }
        match self {
            ExposurePrior::Uniform => {
                let w = T::one() / T::lit(activators.len() as f64);
                Ok(vec![w; activators.len()])
            }
            ExposurePrior::FirstActivator => {
                let mut w = vec![T::zero(); activators.len()];
                w[0] = T::one();
                Ok(w)
            }
            ExposurePrior::Custom(table) => {
                let raw: Vec<f64> = activators
                    .iter()
                    .map(|v| table.get(v.index()).copied().unwrap_or(f64::NAN))
                    .collect();
                if raw.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
                    return Err(Error::Domain("custom prior weights must be finite, non-negative and cover every activator".into()));
                }
                let total: f64 = raw.iter().sum();
                if total <= 0.0 {
                    return Err(Error::Domain("custom prior has zero mass on the exposure set".into()));
                }
                Ok(raw.into_iter().map(|w| T::lit(w / total)).collect())
            }
        }
    }
}

#[inline]
pub(crate) fn align<T: Scalar>(a: T, b: T) -> T {
    a * b + (T::one() - a) * (T::one() - b)
}

/// Probability that two nodes draw the same leaning on one axis.
pub fn alignment_prob<T: Scalar>(phi_u: T, phi_v: T) -> Result<T> {
    if !in_unit(phi_u) || !in_unit(phi_v) {
        return Err(Error::Domain(format!("polarities ({phi_u}, {phi_v}) outside [0, 1]")));
    }
    Ok(align(phi_u, phi_v))
}

#[inline]
pub(crate) fn pair_prob_unchecked<T: Scalar>(gamma: &[T], theta_u: &[T], phi_u: &[T], phi_v: &[T]) -> T {
    let mut p = T::zero();
    for k in 0..gamma.len() {
        p += gamma[k] * theta_u[k] * align(phi_u[k], phi_v[k]);
    }
    p
}

/// Probability that `u` adopts an item with topics `gamma` after seeing it
/// from `v`.
pub fn pair_activation_prob<T: Scalar>(
    gamma: &ItemTopics<T>,
    theta_u: &[T],
    phi_u: &[T],
    phi_v: &[T],
) -> Result<T> {
    let k = gamma.k();
    for len in [theta_u.len(), phi_u.len(), phi_v.len()] {
        if len != k {
            return Err(Error::Shape { expected: k, got: len });
        }
    }
    if let Some(x) = theta_u.iter().chain(phi_u).chain(phi_v).find(|x| !in_unit(**x)) {
        return Err(Error::Domain(format!("parameter {x} outside [0, 1]")));
    }
    Ok(pair_prob_unchecked(gamma.gamma(), theta_u, phi_u, phi_v))
}

/// Prior-weighted mixture of pairwise probabilities over `activators`.
pub fn mixture_activation_prob<T: Scalar>(
    gamma: &ItemTopics<T>,
    u: NodeId,
    activators: &[NodeId],
    prior: &ExposurePrior,
    emb: &EmbeddingTable<T>,
) -> Result<T> {
    check_dims(gamma, emb)?;
    let weights = prior.weights::<T>(activators)?;
    let mut p = T::zero();
    for (&v, w) in activators.iter().zip(weights) {
        p += w * pair_prob_unchecked(gamma.gamma(), emb.theta(u), emb.phi(u), emb.phi(v));
    }
    Ok(p)
}

fn check_dims<T: Scalar>(gamma: &ItemTopics<T>, emb: &EmbeddingTable<T>) -> Result<()> {
    if gamma.k() != emb.k() {
        Err(Error::Shape {
            expected: emb.k(),
            got: gamma.k(),
        })
    } else {
        Ok(())
    }
}

/// Log-likelihood of one cascade under the full mixture model: each exposed
/// active node contributes `log P(u | F)`, each exposed inactive node
/// `log (1 - P(u | F))`.
pub fn exact_cascade_loglik<T: Scalar>(
    exposures: &CascadeExposures,
    gamma: &ItemTopics<T>,
    prior: &ExposurePrior,
    emb: &EmbeddingTable<T>,
) -> Result<T> {
    let mut ll = T::zero();
    for (u, f) in &exposures.active {
        ll += clamp_prob(mixture_activation_prob(gamma, *u, f, prior, emb)?).ln();
    }
    for (u, f) in &exposures.inactive {
        ll += (T::one() - clamp_prob(mixture_activation_prob(gamma, *u, f, prior, emb)?)).ln();
    }
    Ok(ll)
}

/// How the positive terms of the factorized likelihood are weighted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PositiveWeighting {
    /// Every `(v, u)` pair counts once, matching per-example training.
    #[default]
    PerPair,
    /// Pairs weighted by the exposure prior; a lower bound on the exact
    /// positive term.
    PriorWeighted,
}

/// Positive and negative parts of the factorized log-likelihood.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxLoglik<T> {
    pub positive: T,
    pub negative: T,
}

impl<T: Scalar> ApproxLoglik<T> {
    pub fn total(&self) -> T {
        self.positive + self.negative
    }
}

/// Factorized cascade log-likelihood: every `(v, u)` exposure pair is scored
/// independently with the pairwise probability.
pub fn approx_cascade_loglik_parts<T: Scalar>(
    exposures: &CascadeExposures,
    gamma: &ItemTopics<T>,
    emb: &EmbeddingTable<T>,
    prior: &ExposurePrior,
    weighting: PositiveWeighting,
) -> Result<ApproxLoglik<T>> {
    check_dims(gamma, emb)?;
    let g = gamma.gamma();
    let mut positive = T::zero();
    for (u, f) in &exposures.active {
        let weights = match weighting {
            PositiveWeighting::PerPair => vec![T::one(); f.len()],
            PositiveWeighting::PriorWeighted => prior.weights::<T>(f)?,
        };
        for (&v, w) in f.iter().zip(weights) {
            let p = clamp_prob(pair_prob_unchecked(g, emb.theta(*u), emb.phi(*u), emb.phi(v)));
            positive += w * p.ln();
        }
    }
    let mut negative = T::zero();
    for (u, f) in &exposures.inactive {
        for &v in f {
            let p = clamp_prob(pair_prob_unchecked(g, emb.theta(*u), emb.phi(*u), emb.phi(v)));
            negative += (T::one() - p).ln();
        }
    }
    Ok(ApproxLoglik { positive, negative })
}

pub fn approx_cascade_loglik<T: Scalar>(
    exposures: &CascadeExposures,
    gamma: &ItemTopics<T>,
    emb: &EmbeddingTable<T>,
    prior: &ExposurePrior,
    weighting: PositiveWeighting,
) -> Result<T> {
    approx_cascade_loglik_parts(exposures, gamma, emb, prior, weighting).map(|p| p.total())
}
