//! Item-level splits, held-out pair scoring, ROC AUC and average precision.

use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::cascade::{ActivationLog, ItemId};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::model::{EmbeddingTable, ItemTopics};
use crate::rng::{domain, stream};
use crate::scalar::Scalar;
use crate::trainer::{build_examples, example_prob, fit_items, PairSampling, TrainConfig, TrainExample};

pub use crate::cascade::CascadeExposures;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplitMode {
    Holdout { train_frac: f64 },
    KFold { folds: usize },
}

impl Default for SplitMode {
    fn default() -> Self {
        SplitMode::Holdout { train_frac: 0.9 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SplitPlan {
    pub mode: SplitMode,
    pub seed: u64,
}

/// Fold index of every item. Holdout uses fold 0 for training and fold 1
/// for testing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_count: usize,
    pub assignment: Vec<usize>,
    holdout: bool,
}

impl FoldAssignment {
    /// `(train, test)` item lists of every evaluation round.
    pub fn rounds(&self) -> Vec<(Vec<ItemId>, Vec<ItemId>)> {
        let members = |pred: &dyn Fn(usize) -> bool| -> Vec<ItemId> {
            self.assignment
                .iter()
                .enumerate()
                .filter(|(_, &f)| pred(f))
                .map(|(i, _)| ItemId::from(i))
                .collect()
        };
        if self.holdout {
            vec![(members(&|f| f == 0), members(&|f| f == 1))]
        } else {
            (0..self.fold_count)
                .map(|k| (members(&|f| f != k), members(&|f| f == k)))
                .collect()
        }
    }
}

/// Assigns `n_items` items to folds, uniformly at random under `plan.seed`.
pub fn split_items(n_items: usize, plan: &SplitPlan) -> Result<FoldAssignment> {
    if n_items < 2 {
        return Err(Error::Validation(format!("need at least 2 items to split, got {n_items}")));
    }
    let mut order: Vec<usize> = (0..n_items).collect();
    order.shuffle(&mut stream(plan.seed, &[domain::SPLIT], 0));
    let mut assignment = vec![0usize; n_items];
    match plan.mode {
        SplitMode::Holdout { train_frac } => {
            if !(train_frac > 0.0 && train_frac < 1.0) {
                return Err(Error::Validation(format!("train fraction must lie in (0, 1), got {train_frac}")));
            }
            let n_train = ((train_frac * n_items as f64).round() as usize).clamp(1, n_items - 1);
            for &i in &order[n_train..] {
                assignment[i] = 1;
            }
            Ok(FoldAssignment { fold_count: 2, assignment, holdout: true })
        }
        SplitMode::KFold { folds } => {
            if folds < 2 {
                return Err(Error::Validation(format!("k-fold needs at least 2 folds, got {folds}")));
            }
            if n_items < folds {
                return Err(Error::Validation(format!("{n_items} items cannot fill {folds} folds")));
            }
            for (pos, &i) in order.iter().enumerate() {
                assignment[i] = pos % folds;
            }
            Ok(FoldAssignment { fold_count: folds, assignment, holdout: false })
        }
    }
}

/// A held-out propagation pair with its model score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredPair {
    pub item: ItemId,
    pub v: NodeId,
    pub u: NodeId,
    pub label: bool,
    pub score: f64,
}

/// Labelled pairs of the test items, drawn like training examples but from
/// the evaluation stream `seed`.
pub fn build_test_pairs(
    graph: &DirectedGraph,
    log: &ActivationLog,
    test: &[ItemId],
    sampling: &PairSampling,
    seed: u64,
) -> Result<Vec<TrainExample>> {
    let pairs = build_examples(graph, log, test, sampling, seed, &[domain::EVAL_PAIRS]);
    if pairs.is_empty() {
        return Err(Error::Validation("no test pairs: held-out items never propagated".into()));
    }
    Ok(pairs)
}

pub fn score_pairs<T: Scalar>(pairs: &[TrainExample], items: &[ItemTopics<T>], emb: &EmbeddingTable<T>) -> Vec<ScoredPair> {
    pairs
        .iter()
        .map(|x| ScoredPair {
            item: x.item,
            v: x.v,
            u: x.u,
            label: x.y,
            score: example_prob(x, &items[x.item.index()], emb).to_f64().unwrap(),
        })
        .collect()
}

fn class_counts(pairs: &[ScoredPair]) -> (usize, usize) {
    let pos = pairs.iter().filter(|p| p.label).count();
    (pos, pairs.len() - pos)
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann-Whitney U over average ranks).
pub fn auc_roc(pairs: &[ScoredPair]) -> Result<f64> {
    let (pos, neg) = class_counts(pairs);
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "AUC needs both classes, got {pos} positives and {neg} negatives"
        )));
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[a].score.total_cmp(&pairs[b].score));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && pairs[order[j]].score == pairs[order[i]].score {
            j += 1;
        }
        // 1-based ranks i+1..=j share their mean
        let mid = (i + 1 + j) as f64 / 2.0;
        rank_sum += mid * order[i..j].iter().filter(|&&o| pairs[o].label).count() as f64;
        i = j;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Mean of precision@rank over the ranks of the positives, ranking by
/// descending score; equal scores keep input order.
pub fn average_precision(pairs: &[ScoredPair]) -> Result<f64> {
    let (pos, _) = class_counts(pairs);
    if pos == 0 {
        return Err(Error::UndefinedMetric("average precision needs at least one positive".into()));
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[b].score.total_cmp(&pairs[a].score));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (r, &o) in order.iter().enumerate() {
        if pairs[o].label {
            hits += 1;
            sum += hits as f64 / (r + 1) as f64;
        }
    }
    Ok(sum / pos as f64)
}

/// ROC curve points `(fpr, tpr)`, one per distinct score threshold, from
/// `(0, 0)` to `(1, 1)`.
pub fn roc_curve(pairs: &[ScoredPair]) -> Result<Vec<(f64, f64)>> {
    let (pos, neg) = class_counts(pairs);
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric("ROC curve needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[b].score.total_cmp(&pairs[a].score));
    let mut pts = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    for (r, &o) in order.iter().enumerate() {
        if pairs[o].label {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_tie = order.get(r + 1).is_none_or(|&n| pairs[n].score != pairs[o].score);
        if last_of_tie {
            pts.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        }
    }
    Ok(pts)
}

/// How pairs from different items are combined into one number.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Pooling {
    /// One ranking over all test pairs.
    #[default]
    Pooled,
    /// Unweighted mean over items where the metric is defined.
    PerItem,
}

fn per_item_mean(pairs: &[ScoredPair], metric: fn(&[ScoredPair]) -> Result<f64>) -> Result<f64> {
    let mut sorted = pairs.to_vec();
    sorted.sort_by_key(|p| p.item);
    let values: Vec<f64> = sorted
        .chunk_by(|a, b| a.item == b.item)
        .filter_map(|chunk| metric(chunk).ok())
        .collect();
    if values.is_empty() {
        return Err(Error::UndefinedMetric("no item has a defined metric".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    pub pooling: Pooling,
    /// Activators sampled per test item; `None` uses all of them.
    pub activators: Option<usize>,
    pub negative_ratio: f64,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            pooling: Pooling::Pooled,
            activators: None,
            negative_ratio: 2.0,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn sampling(&self) -> PairSampling {
        PairSampling {
            activators: self.activators,
            negative_ratio: self.negative_ratio,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldMetrics {
    pub fold: usize,
    pub train_items: usize,
    pub test_items: usize,
    pub test_pairs: usize,
    pub test_positives: usize,
    pub auc: f64,
    pub ap: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub folds: Vec<FoldMetrics>,
    /// ROC points of the first fold.
    pub roc: Vec<(f64, f64)>,
}

fn mean_std(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl EvalReport {
    pub fn auc_mean_std(&self) -> (f64, f64) {
        mean_std(self.folds.iter().map(|f| f.auc))
    }

    pub fn ap_mean_std(&self) -> (f64, f64) {
        mean_std(self.folds.iter().map(|f| f.ap))
    }
}

/// Where test scores come from.
pub enum Scorer<'a, T> {
    /// Fit on each fold's training items.
    Fit(&'a TrainConfig),
    /// Use a fixed table for every fold.
    Fixed(&'a EmbeddingTable<T>),
}

/// Scores one set of test items and computes its metrics.
pub fn score_fold<T: Scalar>(
    graph: &DirectedGraph,
    items: &[ItemTopics<T>],
    log: &ActivationLog,
    test: &[ItemId],
    emb: &EmbeddingTable<T>,
    cfg: &EvalConfig,
) -> Result<(Vec<ScoredPair>, f64, f64)> {
    let pairs = build_test_pairs(graph, log, test, &cfg.sampling(), cfg.seed)?;
    let scored = score_pairs(&pairs, items, emb);
    let (auc, ap) = match cfg.pooling {
        Pooling::Pooled => (auc_roc(&scored)?, average_precision(&scored)?),
        Pooling::PerItem => (per_item_mean(&scored, auc_roc)?, per_item_mean(&scored, average_precision)?),
    };
    Ok((scored, auc, ap))
}

/// Runs every evaluation round of `folds`. Rounds are independent and run
/// on the current rayon pool.
pub fn evaluate<T: Scalar>(
    graph: &DirectedGraph,
    items: &[ItemTopics<T>],
    log: &ActivationLog,
    folds: &FoldAssignment,
    scorer: Scorer<'_, T>,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let rounds = folds.rounds();
    let results: Vec<Result<(FoldMetrics, Vec<ScoredPair>)>> = rounds
        .par_iter()
        .enumerate()
        .map(|(fold, (train, test))| {
            let start = Instant::now();
            let fitted;
            let emb = match &scorer {
                Scorer::Fit(tc) => {
                    fitted = fit_items(graph, items, log, train, tc)?.0;
                    &fitted
                }
                Scorer::Fixed(e) => *e,
            };
            let (scored, auc, ap) = score_fold(graph, items, log, test, emb, cfg)?;
            let metrics = FoldMetrics {
                fold,
                train_items: train.len(),
                test_items: test.len(),
                test_pairs: scored.len(),
                test_positives: scored.iter().filter(|p| p.label).count(),
                auc,
                ap,
                seconds: start.elapsed().as_secs_f64(),
            };
            Ok((metrics, scored))
        })
        .collect();
    let mut out = Vec::with_capacity(results.len());
    let mut roc = Vec::new();
    for r in results {
        let (m, scored) = r?;
        if m.fold == 0 {
            roc = roc_curve(&scored)?;
        }
        out.push(m);
    }
    Ok(EvalReport { folds: out, roc })
}
