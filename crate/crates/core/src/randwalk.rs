//! Light lazy random walk (LLRW), its degree-biased modification (MLLRW),
//! k-step propagation and symmetrized visiting-probability similarities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netio::SnapshotSequence;
use crate::sparsemat::{CsrMatrix, Matrix, DEFAULT_DENSE_THRESHOLD};

/// Parameters of the two walks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Laziness: self-loop weight added to every node.
    pub alpha: f64,
    /// Weight of the degree-centrality diagonal in the modified walk.
    pub beta: f64,
    /// Number of walk steps.
    pub k: usize,
    /// Density above which propagated matrices are stored densely.
    pub dense_threshold: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            alpha: 1.0,
            beta: 0.01,
            k: 4,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParam(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParam(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if self.k == 0 {
            return Err(Error::InvalidParam("k must be >= 1".into()));
        }
        Ok(())
    }
}

/// The two similarity matrices of one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityPair {
    /// LLRW similarity; drives the graph regularizer.
    pub h: Matrix,
    /// MLLRW similarity; the factorization target.
    pub w: Matrix,
}

fn check_adjacency(a: &CsrMatrix) -> Result<()> {
    if a.rows() != a.cols() {
        return Err(Error::Shape {
            op: "transition",
            left: a.shape(),
            right: a.shape(),
        });
    }
    if let Some((i, j)) = a.first_asymmetry() {
        return Err(Error::Asymmetric { i, j });
    }
    Ok(())
}

/// `(D + αI)⁻¹(αI + A)`.
pub fn llrw_transition(a: &CsrMatrix, alpha: f64) -> Result<CsrMatrix> {
    check_adjacency(a)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParam(format!("alpha must be >= 0, got {alpha}")));
    }
    let n = a.rows();
    let degrees = a.row_sums();
    let mut triplets = Vec::with_capacity(a.nnz() + n);
    for (i, &d) in degrees.iter().enumerate() {
        let denom = d + alpha;
        if denom == 0.0 {
            return Err(Error::IsolatedNode { node: i });
        }
        if alpha > 0.0 {
            triplets.push((i, i, alpha / denom));
        }
        let (idx, vals) = a.row(i);
        triplets.extend(idx.iter().zip(vals).map(|(&j, &v)| (i, j, v / denom)));
    }
    CsrMatrix::from_triplets(n, n, triplets)
}

/// `βS + (1 − β)·LLRW` with `S = diag(d_i / (|V| − 1))`, rows renormalized
/// to sum to one. A row that mixes to zero (an isolated node under `β = 1`)
/// becomes a self-loop.
pub fn mllrw_transition(a: &CsrMatrix, alpha: f64, beta: f64) -> Result<CsrMatrix> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParam(format!("beta must lie in [0, 1], got {beta}")));
    }
    let lazy = llrw_transition(a, alpha)?;
    let n = a.rows();
    let centrality_scale = if n > 1 { 1.0 / (n as f64 - 1.0) } else { 0.0 };
    let degrees = a.row_sums();
    let mut triplets = Vec::with_capacity(lazy.nnz() + n);
    for (i, d) in degrees.iter().enumerate() {
        triplets.push((i, i, beta * d * centrality_scale));
    }
    triplets.extend(lazy.iter().map(|(i, j, v)| (i, j, (1.0 - beta) * v)));
    let mixed = CsrMatrix::from_triplets(n, n, triplets)?;
    let sums = mixed.row_sums();
    let mut out = mixed.scale_rows(&sums.iter().map(|&s| if s > 0.0 { 1.0 / s } else { 0.0 }).collect::<Vec<_>>());
    let dead: Vec<usize> = (0..n).filter(|&i| sums[i] <= 0.0).collect();
    if !dead.is_empty() {
        out = out.add(&CsrMatrix::from_triplets(n, n, dead.into_iter().map(|i| (i, i, 1.0)))?)?;
    }
    Ok(out)
}

fn check_stochastic(n_rw: &CsrMatrix) -> Result<()> {
    if n_rw.rows() != n_rw.cols() {
        return Err(Error::Shape {
            op: "propagate",
            left: n_rw.shape(),
            right: n_rw.shape(),
        });
    }
    for (row, sum) in n_rw.row_sums().into_iter().enumerate() {
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::NotStochastic { row, sum });
        }
    }
    if n_rw.iter().any(|(_, _, v)| v < 0.0) {
        return Err(Error::Numerical("transition matrix has negative entries".into()));
    }
    Ok(())
}

/// k-step visiting probabilities `P⁽ᵏ⁾ = N_rwᵏ`, computed by repeated
/// multiplication with the sparse operator.
pub fn propagate(n_rw: &CsrMatrix, k: usize) -> Result<Matrix> {
    propagate_with_threshold(n_rw, k, DEFAULT_DENSE_THRESHOLD)
}

pub fn propagate_with_threshold(n_rw: &CsrMatrix, k: usize, dense_threshold: f64) -> Result<Matrix> {
    if k == 0 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    check_stochastic(n_rw)?;
    let mut p = Matrix::from_sparse(n_rw.clone(), dense_threshold);
    for _ in 1..k {
        p = p.mul_sparse(n_rw, dense_threshold)?;
    }
    Ok(p)
}

/// `P + Pᵀ`.
pub fn symmetrize(p: &Matrix) -> Result<Matrix> {
    let (r, c) = p.shape();
    if r != c {
        return Err(Error::Shape {
            op: "symmetrize",
            left: (r, c),
            right: (c, r),
        });
    }
    Ok(match p {
        Matrix::Dense(d) => Matrix::Dense(d + &d.t()),
        Matrix::Sparse(s) => Matrix::Sparse(s.add(&s.transpose())?),
    })
}

fn similarity_for(a: &CsrMatrix, cfg: &WalkConfig) -> Result<SimilarityPair> {
    let h = symmetrize(&propagate_with_threshold(
        &llrw_transition(a, cfg.alpha)?,
        cfg.k,
        cfg.dense_threshold,
    )?)?;
    let w = symmetrize(&propagate_with_threshold(
        &mllrw_transition(a, cfg.alpha, cfg.beta)?,
        cfg.k,
        cfg.dense_threshold,
    )?)?;
    Ok(SimilarityPair { h, w })
}

/// `(H_t, W_t)` for every snapshot, in order.
pub fn snapshot_similarities(seq: &SnapshotSequence, cfg: &WalkConfig) -> Result<Vec<SimilarityPair>> {
    snapshot_similarities_threaded(seq, cfg, 1)
}

/// As [`snapshot_similarities`], spreading snapshots over `threads` workers.
/// Each snapshot is computed independently, so the output does not depend
/// on the thread count.
pub fn snapshot_similarities_threaded(
    seq: &SnapshotSequence,
    cfg: &WalkConfig,
    threads: usize,
) -> Result<Vec<SimilarityPair>> {
    cfg.validate()?;
    let compute = |t: usize| similarity_for(seq.adjacency(t), cfg).map_err(|e| Error::in_snapshot(t + 1, e));
    if threads <= 1 || seq.len() <= 1 {
        return (0..seq.len()).map(compute).collect();
    }
    let mut slots: Vec<Option<Result<SimilarityPair>>> = (0..seq.len()).map(|_| None).collect();
    let chunk = seq.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (c, part) in slots.chunks_mut(chunk).enumerate() {
            let compute = &compute;
            scope.spawn(move || {
                for (off, slot) in part.iter_mut().enumerate() {
                    *slot = Some(compute(c * chunk + off));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every slot filled")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn triangle() -> CsrMatrix {
        CsrMatrix::from_dense(&array![[0., 1., 1.], [1., 0., 1.], [1., 1., 0.]])
    }

    fn edge() -> CsrMatrix {
        CsrMatrix::from_dense(&array![[0., 1.], [1., 0.]])
    }

    fn assert_close(a: &Array2<f64>, b: &Array2<f64>, tol: f64) {
        assert_eq!(a.dim(), b.dim());
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn llrw_triangle_is_uniform() {
        let p = llrw_transition(&triangle(), 1.0).unwrap().to_dense();
        assert_close(&p, &Array2::from_elem((3, 3), 1.0 / 3.0), 1e-15);
    }

    #[test]
    fn llrw_alpha_zero_is_standard_walk() {
        let a = triangle();
        let p = llrw_transition(&a, 0.0).unwrap().to_dense();
        assert_close(&p, &(a.to_dense() / 2.0), 1e-15);
    }

    #[test]
    fn llrw_single_edge() {
        let p = llrw_transition(&edge(), 1.0).unwrap().to_dense();
        assert_close(&p, &Array2::from_elem((2, 2), 0.5), 1e-15);
    }

    #[test]
    fn llrw_isolated_node() {
        let a = CsrMatrix::zeros(2, 2);
        assert!(matches!(llrw_transition(&a, 0.0), Err(Error::IsolatedNode { node: 0 })));
        assert_close(&llrw_transition(&a, 2.0).unwrap().to_dense(), &Array2::eye(2), 0.0);
    }

    #[test]
    fn llrw_rejects_asymmetric_input() {
        let a = CsrMatrix::from_dense(&array![[0., 1.], [0., 0.]]);
        assert!(matches!(llrw_transition(&a, 1.0), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn mllrw_beta_zero_is_llrw() {
        let a = triangle();
        assert_close(
            &mllrw_transition(&a, 1.0, 0.0).unwrap().to_dense(),
            &llrw_transition(&a, 1.0).unwrap().to_dense(),
            1e-12,
        );
    }

    #[test]
    fn mllrw_beta_one_is_point_mass() {
        let p = mllrw_transition(&triangle(), 1.0, 1.0).unwrap().to_dense();
        assert_close(&p, &Array2::eye(3), 1e-15);
    }

    #[test]
    fn mllrw_single_edge_half_mix() {
        let p = mllrw_transition(&edge(), 1.0, 0.5).unwrap().to_dense();
        assert_close(&p, &array![[0.75, 0.25], [0.25, 0.75]], 1e-15);
    }

    #[test]
    fn mllrw_isolated_node_with_full_teleport_stays_put() {
        let a = CsrMatrix::from_dense(&array![[0., 1., 0.], [1., 0., 0.], [0., 0., 0.]]);
        let p = mllrw_transition(&a, 1.0, 1.0).unwrap();
        assert_eq!(p.get(2, 2), 1.0);
        for s in p.row_sums() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn propagate_examples() {
        let n = llrw_transition(&triangle(), 0.0).unwrap();
        assert_close(&propagate(&n, 1).unwrap().to_dense(), &n.to_dense(), 0.0);
        let half = CsrMatrix::from_dense(&Array2::from_elem((2, 2), 0.5));
        assert_close(&propagate(&half, 2).unwrap().to_dense(), &half.to_dense(), 1e-15);
    }

    #[test]
    fn propagate_rejects_non_stochastic() {
        let bad = CsrMatrix::from_dense(&array![[0.5, 0.4], [0.5, 0.5]]);
        assert!(matches!(propagate(&bad, 2), Err(Error::NotStochastic { row: 0, .. })));
        assert!(propagate(&CsrMatrix::identity(2), 0).is_err());
    }

    #[test]
    fn propagate_layouts_agree() {
        let a = CsrMatrix::from_dense(&array![
            [0., 1., 0., 0., 1.],
            [1., 0., 1., 0., 0.],
            [0., 1., 0., 1., 0.],
            [0., 0., 1., 0., 1.],
            [1., 0., 0., 1., 0.]
        ]);
        let n = llrw_transition(&a, 1.0).unwrap();
        let sparse = propagate_with_threshold(&n, 4, 1.1).unwrap();
        let dense = propagate_with_threshold(&n, 4, 0.0).unwrap();
        assert!(!sparse.is_dense());
        assert!(dense.is_dense());
        assert_close(&sparse.to_dense(), &dense.to_dense(), 1e-15);
    }

    #[test]
    fn symmetrize_examples() {
        let p = Matrix::Dense(array![[0., 1.], [0., 0.]]);
        assert_eq!(symmetrize(&p).unwrap().to_dense(), array![[0., 1.], [1., 0.]]);
        let s = Matrix::Dense(array![[1., 2.], [2., 1.]]);
        assert_eq!(symmetrize(&s).unwrap().to_dense(), array![[2., 4.], [4., 2.]]);
        let z = Matrix::Sparse(CsrMatrix::zeros(3, 3));
        assert_eq!(symmetrize(&z).unwrap().to_dense(), Array2::<f64>::zeros((3, 3)));
        assert!(symmetrize(&Matrix::Dense(Array2::zeros((2, 3)))).is_err());
    }

    #[test]
    fn similarity_examples() {
        let seq = SnapshotSequence::from_edge_lists(3, &[vec![(0, 1), (1, 2), (0, 2)]]).unwrap();
        let cfg = WalkConfig {
            alpha: 1.0,
            beta: 0.0,
            k: 1,
            ..Default::default()
        };
        let pairs = snapshot_similarities(&seq, &cfg).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_close(&pairs[0].h.to_dense(), &Array2::from_elem((3, 3), 2.0 / 3.0), 1e-15);
        assert_close(&pairs[0].h.to_dense(), &pairs[0].w.to_dense(), 1e-12);

        let empty = SnapshotSequence::from_edge_lists(3, &[vec![], vec![(0, 1)]]).unwrap();
        let pairs = snapshot_similarities(&empty, &WalkConfig::default()).unwrap();
        assert_close(&pairs[0].h.to_dense(), &(Array2::eye(3) * 2.0), 1e-15);
    }

    #[test]
    fn similarity_errors_carry_snapshot_index() {
        let seq = SnapshotSequence::from_edge_lists(2, &[vec![(0, 1)], vec![]]).unwrap();
        let cfg = WalkConfig {
            alpha: 0.0,
            ..Default::default()
        };
        match snapshot_similarities(&seq, &cfg) {
            Err(Error::InSnapshot { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn threaded_matches_sequential() {
        let lists: Vec<Vec<(usize, usize)>> =
            (0..5).map(|t| (0..8).map(|i| (i, (i + t + 1) % 9)).filter(|(a, b)| a != b).collect()).collect();
        let seq = SnapshotSequence::from_edge_lists(9, &lists).unwrap();
        let cfg = WalkConfig::default();
        assert_eq!(
            snapshot_similarities(&seq, &cfg).unwrap(),
            snapshot_similarities_threaded(&seq, &cfg, 3).unwrap()
        );
    }

    #[test]
    fn config_validation() {
        assert!(WalkConfig { alpha: -1.0, ..Default::default() }.validate().is_err());
        assert!(WalkConfig { beta: 1.5, ..Default::default() }.validate().is_err());
        assert!(WalkConfig { k: 0, ..Default::default() }.validate().is_err());
        assert!(WalkConfig::default().validate().is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn graph() -> impl Strategy<Value = CsrMatrix> {
            (2usize..16).prop_flat_map(|n| {
                proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                    let mut trip = Vec::new();
                    let mut b = bits.into_iter();
                    for i in 0..n {
                        for j in (i + 1)..n {
                            if b.next().unwrap() {
                                trip.push((i, j, 1.0));
                                trip.push((j, i, 1.0));
                            }
                        }
                    }
                    CsrMatrix::from_triplets(n, n, trip).unwrap()
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn transitions_are_stochastic(a in graph(), alpha in 0.1f64..3.0, beta in 0.0f64..=1.0) {
                for p in [llrw_transition(&a, alpha).unwrap(), mllrw_transition(&a, alpha, beta).unwrap()] {
                    for s in p.row_sums() {
                        prop_assert!((s - 1.0).abs() <= 1e-9);
                    }
                }
            }

            #[test]
            fn similarities_symmetric_and_bounded(a in graph(), k in 1usize..5, beta in 0.0f64..=1.0) {
                let n = a.rows();
                let seq = SnapshotSequence::from_edge_lists(
                    n,
                    &[a.iter().filter(|&(i, j, _)| i < j).map(|(i, j, _)| (i, j)).collect()],
                ).unwrap();
                let cfg = WalkConfig { alpha: 1.0, beta, k, ..Default::default() };
                let pair = &snapshot_similarities(&seq, &cfg).unwrap()[0];
                for m in [&pair.h, &pair.w] {
                    prop_assert!(m.first_asymmetry().is_none());
                    let (lo, hi) = m.min_max();
                    prop_assert!(lo >= 0.0 && hi <= 2.0 + 1e-12);
                }
            }

            #[test]
            fn k_steps_equal_repeated_single_steps(a in graph(), k in 1usize..6) {
                let n_rw = llrw_transition(&a, 1.0).unwrap();
                let direct = propagate(&n_rw, k).unwrap().to_dense();
                let mut acc = propagate(&n_rw, 1).unwrap().to_dense();
                let one = propagate(&n_rw, 1).unwrap().to_dense();
                for _ in 1..k {
                    acc = acc.dot(&one);
                }
                for (x, y) in direct.iter().zip(acc.iter()) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
                for s in direct.sum_axis(ndarray::Axis(1)).iter() {
                    prop_assert!((s - 1.0).abs() <= 1e-9);
                }
            }

            #[test]
            fn permutation_equivariance(a in graph(), seed in any::<u64>()) {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let n = a.rows();
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                let edges: Vec<(usize, usize)> = a.iter().filter(|&(i, j, _)| i < j).map(|(i, j, _)| (i, j)).collect();
                let seq = SnapshotSequence::from_edge_lists(n, &[edges]).unwrap();
                let permuted = seq.permuted(&perm).unwrap();
                let cfg = WalkConfig { alpha: 1.0, beta: 0.3, k: 3, ..Default::default() };
                let base = &snapshot_similarities(&seq, &cfg).unwrap()[0];
                let moved = &snapshot_similarities(&permuted, &cfg).unwrap()[0];
                for i in 0..n {
                    for j in 0..n {
                        prop_assert!((base.h.get(i, j) - moved.h.get(perm[i], perm[j])).abs() <= 1e-12);
                        prop_assert!((base.w.get(i, j) - moved.w.get(perm[i], perm[j])).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
