//! Train/test protocol, balanced negative sampling and ranking metrics.
//!
//! The last snapshot `G_N` is held out and `G_1..G_{N−1}` are used for
//! training.
//!
//! - Link task: positives are pairs that appear in `G_N` but not in
//!   `G_{N−1}`; negatives are drawn from pairs absent from both.
//! - Unlink task: positives are edges of `G_{N−1}` that persist into `G_N`;
//!   negatives are edges of `G_{N−1}` that disappear. The larger side is
//!   subsampled so both classes have the same size.
//!
//! For unlink runs AUC is reported with persisting edges as the positive
//! class on raw scores, which equals AUC with disappearances as the
//! positive class on negated scores. AP ranks edges by ascending raw score,
//! i.e. the disappearance ranking, and counts disappeared edges as hits.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netio::SnapshotSequence;
use crate::predict::{rank_order, Direction, ScoredPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Link,
    Unlink,
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "link" => Ok(Task::Link),
            "unlink" => Ok(Task::Unlink),
            other => Err(Error::InvalidParam(format!("unknown task `{other}`"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Link => "link",
            Task::Unlink => "unlink",
        })
    }
}

pub type Pair = (usize, usize);

/// Held-out evaluation pairs for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSplit {
    pub train: SnapshotSequence,
    pub test_positives: Vec<Pair>,
    pub test_negatives: Vec<Pair>,
    pub task: Task,
    pub sample_seed: u64,
}

fn edge_set(seq: &SnapshotSequence, t: usize) -> BTreeSet<Pair> {
    seq.edges(t).into_iter().collect()
}

/// Picks `k` items of `items` uniformly without replacement, preserving
/// their input order.
fn subsample(items: Vec<Pair>, k: usize, rng: &mut ChaCha8Rng) -> Vec<Pair> {
    if k >= items.len() {
        return items;
    }
    let mut idx = sample(rng, items.len(), k).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| items[i]).collect()
}

/// Draws `k` pairs uniformly from the pairs absent from both `a` and `b`.
fn sample_absent_pairs(
    n: usize,
    a: &BTreeSet<Pair>,
    b: &BTreeSet<Pair>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Pair>> {
    let total = n * n.saturating_sub(1) / 2;
    let present = a.union(b).count();
    let pool = total - present;
    if pool < k {
        return Err(Error::InsufficientNegatives { needed: k, pool });
    }
    if 2 * k >= pool {
        let all: Vec<Pair> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|p| !a.contains(p) && !b.contains(p))
            .collect();
        return Ok(subsample(all, k, rng));
    }
    let mut chosen = BTreeSet::new();
    while chosen.len() < k {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let p = (i.min(j), i.max(j));
        if !a.contains(&p) && !b.contains(&p) {
            chosen.insert(p);
        }
    }
    Ok(chosen.into_iter().collect())
}

/// Builds the held-out positives and balanced negatives for `task`.
pub fn make_split(seq: &SnapshotSequence, task: Task, seed: u64) -> Result<EvalSplit> {
    let n_snap = seq.len();
    if n_snap < 2 {
        return Err(Error::InvalidParam("evaluation needs at least 2 snapshots".into()));
    }
    let prev = edge_set(seq, n_snap - 2);
    let last = edge_set(seq, n_snap - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (positives, negatives) = match task {
        Task::Link => {
            let positives: Vec<Pair> = last.difference(&prev).copied().collect();
            if positives.is_empty() {
                return Err(Error::NoEvents("no new edges in the last snapshot".into()));
            }
            let negatives = sample_absent_pairs(seq.node_count(), &prev, &last, positives.len(), &mut rng)?;
            (positives, negatives)
        }
        Task::Unlink => {
            let persisting: Vec<Pair> = prev.intersection(&last).copied().collect();
            let vanished: Vec<Pair> = prev.difference(&last).copied().collect();
            if persisting.is_empty() || vanished.is_empty() {
                return Err(Error::NoEvents(
                    "unlink evaluation needs both persisting and disappearing edges".into(),
                ));
            }
            let k = persisting.len().min(vanished.len());
            let persisting = subsample(persisting, k, &mut rng);
            let vanished = subsample(vanished, k, &mut rng);
            (persisting, vanished)
        }
    };
    Ok(EvalSplit {
        train: seq.prefix(n_snap - 1),
        test_positives: positives,
        test_negatives: negatives,
        task,
        sample_seed: seed,
    })
}

/// AUC with its comparison counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AucCounts {
    pub auc: f64,
    /// Total comparisons `|pos|·|neg|`.
    pub n: u64,
    /// Comparisons where the positive scores higher.
    pub n_prime: u64,
    /// Exact ties.
    pub n_dprime: u64,
}

/// `(n′ + 0.5·n″) / n` over every positive/negative comparison.
pub fn auc(pos_scores: &[f64], neg_scores: &[f64]) -> Result<AucCounts> {
    if pos_scores.is_empty() || neg_scores.is_empty() {
        return Err(Error::EmptyInput("AUC needs positive and negative scores".into()));
    }
    let mut n_prime = 0u64;
    let mut n_dprime = 0u64;
    for &p in pos_scores {
        for &q in neg_scores {
            if p > q {
                n_prime += 1;
            } else if p == q {
                n_dprime += 1;
            }
        }
    }
    let n = (pos_scores.len() * neg_scores.len()) as u64;
    Ok(AucCounts {
        auc: (n_prime as f64 + 0.5 * n_dprime as f64) / n as f64,
        n,
        n_prime,
        n_dprime,
    })
}

/// Mean of precision@rank over the ranks of the positives.
pub fn average_precision(labels_ranked: &[bool]) -> Result<f64> {
    let mut hits = 0usize;
    let mut total = 0.0;
    for (rank, &is_pos) in labels_ranked.iter().enumerate() {
        if is_pos {
            hits += 1;
            total += hits as f64 / (rank + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(Error::EmptyInput("AP needs at least one positive".into()));
    }
    Ok(total / hits as f64)
}

/// Scores node pairs after training.
pub trait PairScorer: Send + Sync {
    fn score(&self, i: usize, j: usize) -> f64;
}

impl<F: Fn(usize, usize) -> f64 + Send + Sync> PairScorer for F {
    fn score(&self, i: usize, j: usize) -> f64 {
        self(i, j)
    }
}

/// A method that can be trained on `G_1..G_{N−1}` and then score pairs.
pub trait Predictor {
    fn name(&self) -> String;

    /// `seed_offset` is 0 for a single training run and the trial index when
    /// every trial retrains.
    fn train(&self, train: &SnapshotSequence, task: Task, seed_offset: u64) -> Result<Box<dyn PairScorer>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub auc: f64,
    pub ap: f64,
    pub sample_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub method: String,
    pub task: Task,
    /// Mean AUC over trials.
    pub auc: f64,
    /// Mean AP over trials.
    pub ap: f64,
    /// Comparisons per trial (`|pos|·|neg|`).
    pub n_comparisons: u64,
    pub trials: usize,
    pub base_seed: u64,
    pub per_trial: Vec<TrialMetrics>,
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub const CSV_HEADER: &'static str = "dataset,task,method,auc,ap,trials,seed";

    pub fn csv_row(&self, dataset: &str) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            dataset, self.task, self.method, self.auc, self.ap, self.trials, self.base_seed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub trials: usize,
    pub base_seed: u64,
    /// Retrain the predictor in every trial with a trial-specific seed
    /// instead of training once.
    pub retrain_per_trial: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            trials: 5,
            base_seed: 0,
            retrain_per_trial: false,
        }
    }
}

/// AUC and AP of one split under a trained scorer.
pub fn score_split(split: &EvalSplit, scorer: &dyn PairScorer) -> Result<(AucCounts, f64)> {
    let score_all = |pairs: &[Pair]| -> Vec<ScoredPair> {
        pairs
            .iter()
            .map(|&(i, j)| ScoredPair { i, j, score: scorer.score(i, j) })
            .collect()
    };
    let pos = score_all(&split.test_positives);
    let neg = score_all(&split.test_negatives);
    if pos.iter().chain(&neg).any(|p| !p.score.is_finite()) {
        return Err(Error::Numerical("predictor produced a non-finite score".into()));
    }
    let pos_scores: Vec<f64> = pos.iter().map(|p| p.score).collect();
    let neg_scores: Vec<f64> = neg.iter().map(|p| p.score).collect();
    let counts = auc(&pos_scores, &neg_scores)?;

    // AP follows the task's ranking: descending scores with new links as
    // hits, or ascending scores with disappeared edges as hits.
    let (direction, hits_are_positives) = match split.task {
        Task::Link => (Direction::Link, true),
        Task::Unlink => (Direction::Unlink, false),
    };
    let mut ranked: Vec<(ScoredPair, bool)> = pos
        .into_iter()
        .map(|p| (p, hits_are_positives))
        .chain(neg.into_iter().map(|p| (p, !hits_are_positives)))
        .collect();
    ranked.sort_by(|a, b| rank_order(direction, &a.0, &b.0));
    let labels: Vec<bool> = ranked.iter().map(|(_, hit)| *hit).collect();
    Ok((counts, average_precision(&labels)?))
}

/// Repeated evaluation with the default options except `trials` and seed.
pub fn evaluate(
    seq: &SnapshotSequence,
    predictor: &dyn Predictor,
    task: Task,
    trials: usize,
    base_seed: u64,
) -> Result<MetricReport> {
    evaluate_with(
        seq,
        predictor,
        task,
        &EvalOptions {
            trials,
            base_seed,
            retrain_per_trial: false,
        },
    )
}

/// Runs `opts.trials` splits with seeds `base_seed..base_seed + trials` and
/// averages AUC and AP.
pub fn evaluate_with(
    seq: &SnapshotSequence,
    predictor: &dyn Predictor,
    task: Task,
    opts: &EvalOptions,
) -> Result<MetricReport> {
    if opts.trials == 0 {
        return Err(Error::InvalidParam("trials must be >= 1".into()));
    }
    let first = make_split(seq, task, opts.base_seed)?;
    let mut shared = None;
    if !opts.retrain_per_trial {
        shared = Some(predictor.train(&first.train, task, 0)?);
    }
    let mut per_trial = Vec::with_capacity(opts.trials);
    let mut n_comparisons = 0;
    for trial in 0..opts.trials {
        let seed = opts.base_seed + trial as u64;
        let split = if trial == 0 { first.clone() } else { make_split(seq, task, seed)? };
        let owned;
        let scorer: &dyn PairScorer = match &shared {
            Some(s) => s.as_ref(),
            None => {
                owned = predictor.train(&split.train, task, trial as u64)?;
                owned.as_ref()
            }
        };
        let (counts, ap) = score_split(&split, scorer)?;
        n_comparisons = counts.n;
        per_trial.push(TrialMetrics {
            auc: counts.auc,
            ap,
            sample_seed: seed,
        });
    }
    let mean = |f: fn(&TrialMetrics) -> f64| per_trial.iter().map(f).sum::<f64>() / per_trial.len() as f64;
    Ok(MetricReport {
        method: predictor.name(),
        task,
        auc: mean(|m| m.auc),
        ap: mean(|m| m.ap),
        n_comparisons,
        trials: opts.trials,
        base_seed: opts.base_seed,
        per_trial,
    })
}
