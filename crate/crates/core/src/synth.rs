//! Planted-community dynamic networks.
//!
//! Nodes are split into equal communities. A fixed random subset of the
//! intra-community pairs forms the latent long-term structure: a latent
//! edge present in one snapshot persists with `stable_persistence`, and an
//! absent latent edge (re)appears with `stable_rebirth`. On top of that each
//! snapshot adds short-lived edges between arbitrary pairs with probability
//! `transient_rate`; a transient edge persists into the next snapshot with
//! `transient_persistence`.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::netio::SnapshotSequence;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedConfig {
    pub nodes: usize,
    pub communities: usize,
    pub snapshots: usize,
    /// Fraction of intra-community pairs that are latent long-term edges.
    pub latent_density: f64,
    pub stable_persistence: f64,
    pub stable_rebirth: f64,
    pub transient_rate: f64,
    pub transient_persistence: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            nodes: 60,
            communities: 2,
            snapshots: 5,
            latent_density: 0.15,
            stable_persistence: 0.9,
            stable_rebirth: 0.9,
            transient_rate: 0.01,
            transient_persistence: 0.1,
            seed: 0,
        }
    }
}

/// A generated network together with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedNetwork {
    pub sequence: SnapshotSequence,
    pub community: Vec<usize>,
    pub latent: BTreeSet<(usize, usize)>,
}

impl PlantedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 || self.communities == 0 || self.communities > self.nodes || self.snapshots == 0 {
            return Err(Error::InvalidParam(
                "need nodes >= 2, 1 <= communities <= nodes and snapshots >= 1".into(),
            ));
        }
        let probs = [
            ("latent_density", self.latent_density),
            ("stable_persistence", self.stable_persistence),
            ("stable_rebirth", self.stable_rebirth),
            ("transient_rate", self.transient_rate),
            ("transient_persistence", self.transient_persistence),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParam(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<PlantedNetwork> {
        self.validate()?;
        let n = self.nodes;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let community: Vec<usize> = (0..n).map(|i| i * self.communities / n).collect();
        let pairs = || (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)));

        let latent: BTreeSet<(usize, usize)> = pairs()
            .filter(|&(i, j)| community[i] == community[j])
            .filter(|_| rng.gen_bool(self.latent_density))
            .collect();

        let mut stable: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut transient: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut lists = Vec::with_capacity(self.snapshots);
        for t in 0..self.snapshots {
            stable = latent
                .iter()
                .copied()
                .filter(|p| {
                    // every latent edge starts out as if present before t = 0
                    let keep = if t == 0 || stable.contains(p) {
                        self.stable_persistence
                    } else {
                        self.stable_rebirth
                    };
                    rng.gen_bool(keep)
                })
                .collect();
            let mut next: BTreeSet<(usize, usize)> = transient
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(self.transient_persistence))
                .collect();
            for p in pairs() {
                if rng.gen_bool(self.transient_rate) {
                    next.insert(p);
                }
            }
            transient = next;
            lists.push(stable.union(&transient).copied().collect::<Vec<_>>());
        }
        Ok(PlantedNetwork {
            sequence: SnapshotSequence::from_edge_lists(n, &lists)?,
            community,
            latent,
        })
    }
}
