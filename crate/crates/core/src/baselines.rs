//! Comparison predictors and the factorization model behind one interface.
//!
//! - Adamic–Adar on a static aggregate: the union of the training snapshots
//!   for link prediction, `G_{N−1}` alone for unlink prediction.
//! - Decayed common neighbours: per-snapshot common-neighbour counts
//!   weighted by `θ^{(N−1)−t}`. This is one reading of "decayed common
//!   neighbour" and only approximates the originally published method.
//! - The LULS variants: similarities, joint factorization, then `R`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evalkit::{PairScorer, Predictor, Task};
use crate::factor::{fit, HyperParams};
use crate::netio::SnapshotSequence;
use crate::predict::{score_matrix, ScoreMatrix};
use crate::randwalk::{snapshot_similarities_threaded, WalkConfig};
use crate::sparsemat::CsrMatrix;

/// The static graph a static method scores against.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticContext {
    pub aggregate: CsrMatrix,
}

impl StaticContext {
    pub fn new(aggregate: CsrMatrix) -> Result<Self> {
        let (r, c) = aggregate.shape();
        if r != c {
            return Err(Error::Shape {
                op: "static context",
                left: (r, c),
                right: (c, r),
            });
        }
        if let Some((i, j)) = aggregate.first_asymmetry() {
            return Err(Error::Asymmetric { i, j });
        }
        Ok(StaticContext { aggregate })
    }

    /// Union of the training snapshots for links, the last one for unlinks.
    pub fn for_task(train: &SnapshotSequence, task: Task) -> Self {
        let aggregate = match task {
            Task::Link => train.union(),
            Task::Unlink => train.last().clone(),
        };
        StaticContext { aggregate }
    }

    pub fn degree(&self, z: usize) -> usize {
        self.aggregate.row(z).0.len()
    }
}

/// Visits the common entries of two sorted index slices.
fn for_each_common(a: &[usize], b: &[usize], mut f: impl FnMut(usize)) {
    let (mut p, mut q) = (0, 0);
    while p < a.len() && q < b.len() {
        match a[p].cmp(&b[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                f(a[p]);
                p += 1;
                q += 1;
            }
        }
    }
}

pub fn common_neighbor_count(a: &CsrMatrix, i: usize, j: usize) -> usize {
    let mut count = 0;
    for_each_common(a.row(i).0, a.row(j).0, |_| count += 1);
    count
}

/// `Σ_{z ∈ Γ(i)∩Γ(j)} 1/ln d_z`, ignoring common neighbours of degree ≤ 1.
pub fn adamic_adar(ctx: &StaticContext, i: usize, j: usize) -> f64 {
    let mut total = 0.0;
    for_each_common(ctx.aggregate.row(i).0, ctx.aggregate.row(j).0, |z| {
        let d = ctx.degree(z);
        if d > 1 {
            total += 1.0 / (d as f64).ln();
        }
    });
    total
}

/// `Σ_t θ^{(N−1)−t}·|Γ_t(i) ∩ Γ_t(j)|` over the training snapshots `seq`,
/// with `0⁰ = 1` so that `θ = 0` keeps only the last snapshot.
pub fn decayed_common_neighbors(seq: &SnapshotSequence, theta: f64, i: usize, j: usize) -> f64 {
    let last = seq.len().saturating_sub(1);
    seq.snapshots()
        .iter()
        .enumerate()
        .map(|(t, a)| theta.powi((last - t) as i32) * common_neighbor_count(a, i, j) as f64)
        .sum()
}

pub struct AdamicAdar;

impl Predictor for AdamicAdar {
    fn name(&self) -> String {
        "aa".into()
    }

    fn train(&self, train: &SnapshotSequence, task: Task, _: u64) -> Result<Box<dyn PairScorer>> {
        let ctx = StaticContext::for_task(train, task);
        Ok(Box::new(move |i: usize, j: usize| adamic_adar(&ctx, i, j)))
    }
}

/// Uses every training snapshot for both tasks; the decay already favours
/// the most recent one.
pub struct DecayedCommonNeighbors {
    pub theta: f64,
}

impl Predictor for DecayedCommonNeighbors {
    fn name(&self) -> String {
        "dcn".into()
    }

    fn train(&self, train: &SnapshotSequence, _: Task, _: u64) -> Result<Box<dyn PairScorer>> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidParam(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        let seq = train.clone();
        let theta = self.theta;
        Ok(Box::new(move |i: usize, j: usize| decayed_common_neighbors(&seq, theta, i, j)))
    }
}

/// Which regularizers the factorization keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Both the graph regularizer and the smoothness penalty.
    #[default]
    Luls1,
    /// No graph regularizer (`γ = 0`).
    Luls2,
    /// Neither regularizer (`λ = γ = 0`).
    Luls3,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Luls1, Variant::Luls2, Variant::Luls3];

    pub fn apply(self, hp: &HyperParams) -> HyperParams {
        let mut hp = *hp;
        match self {
            Variant::Luls1 => {}
            Variant::Luls2 => hp.gamma = 0.0,
            Variant::Luls3 => {
                hp.gamma = 0.0;
                hp.lambda = 0.0;
            }
        }
        hp
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "luls1" => Ok(Variant::Luls1),
            "luls2" => Ok(Variant::Luls2),
            "luls3" => Ok(Variant::Luls3),
            other => Err(Error::InvalidParam(format!(
                "unknown variant `{other}` (expected luls1, luls2 or luls3)"
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Luls1 => "luls1",
            Variant::Luls2 => "luls2",
            Variant::Luls3 => "luls3",
        })
    }
}

impl PairScorer for ScoreMatrix {
    fn score(&self, i: usize, j: usize) -> f64 {
        ScoreMatrix::score(self, i, j)
    }
}

/// Similarities, joint factorization and proximity reconstruction.
#[derive(Debug, Clone)]
pub struct Luls {
    pub variant: Variant,
    pub walk: WalkConfig,
    pub hyper: HyperParams,
    pub threads: usize,
}

impl Luls {
    pub fn new(variant: Variant, walk: WalkConfig, hyper: HyperParams) -> Self {
        Luls {
            variant,
            walk,
            hyper,
            threads: 1,
        }
    }

    /// Hyper-parameters after the variant override.
    pub fn effective_hyper(&self) -> HyperParams {
        self.variant.apply(&self.hyper)
    }

    pub fn score(&self, train: &SnapshotSequence, seed_offset: u64) -> Result<ScoreMatrix> {
        let pairs = snapshot_similarities_threaded(train, &self.walk, self.threads).map_err(|e| e.at_stage("randwalk"))?;
        let mut hp = self.effective_hyper();
        hp.seed = hp.seed.wrapping_add(seed_offset);
        let state = fit(&pairs, &hp).map_err(|e| e.at_stage("factor"))?;
        score_matrix(&state).map_err(|e| e.at_stage("predict"))
    }
}

impl Predictor for Luls {
    fn name(&self) -> String {
        self.variant.to_string()
    }

    fn train(&self, train: &SnapshotSequence, _: Task, seed_offset: u64) -> Result<Box<dyn PairScorer>> {
        Ok(Box::new(self.score(train, seed_offset)?))
    }
}
