//! Temporal link and unlink prediction for dynamic networks.
//!
//! A dynamic network is a sequence of snapshots over a fixed node set. For
//! each snapshot two symmetrized k-step random-walk similarity matrices are
//! built: one from a light lazy walk and one from a degree-biased variant.
//! The degree-biased similarities of all snapshots are factorized jointly
//! into a shared global factor `U` (long-term relations) and one temporary
//! factor `V_t` per snapshot (short-term relations), with a graph
//! regularizer on `U` and a smoothness penalty between consecutive `V_t`.
//! The reconstructed proximity `R = Σ_t U V_tᵀ` ranks unconnected pairs
//! for link formation and connected pairs for link disappearance.
//!
//! Modules, bottom up:
//!
//! - [`netio`]: ingest timestamped edges, segment into snapshots, persist.
//! - [`sparsemat`]: the sparse/dense algebra the rest of the crate needs.
//! - [`randwalk`]: transition operators, propagation and similarities.
//! - [`factor`]: the joint non-negative factorization.
//! - [`predict`]: score matrix and ranked link / unlink candidates.
//! - [`evalkit`]: test splits, AUC, average precision, repeated trials.
//! - [`baselines`]: Adamic–Adar and decayed common neighbours.
//! - [`pipeline`]: run configuration and the `prepare` / `predict` /
//!   `evaluate` commands behind the binary.
//! - [`synth`]: planted-community dynamic networks for experiments.

pub mod baselines;
pub mod error;
pub mod evalkit;
pub mod factor;
pub mod netio;
pub mod pipeline;
pub mod predict;
pub mod randwalk;
pub mod sparsemat;
pub mod synth;

pub use error::{Error, Result};
