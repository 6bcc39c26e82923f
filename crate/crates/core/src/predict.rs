//! Proximity reconstruction and ranked link / unlink candidates.

use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::factor::FactorState;
use crate::sparsemat::CsrMatrix;

/// Reconstructed proximity `R` between every pair of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub r: Array2<f64>,
    pub symmetrized: bool,
}

impl ScoreMatrix {
    pub fn nodes(&self) -> usize {
        self.r.nrows()
    }

    pub fn score(&self, i: usize, j: usize) -> f64 {
        self.r[[i, j]]
    }
}

/// `R = sym(Σ_t U V_tᵀ)` where `sym(X) = (X + Xᵀ)/2`.
pub fn score_matrix(state: &FactorState) -> Result<ScoreMatrix> {
    if state.v.is_empty() {
        return Err(Error::EmptyInput("factor state has no temporary factors".into()));
    }
    let mut v_sum = Array2::<f64>::zeros(state.v[0].dim());
    for vt in &state.v {
        v_sum += &**vt;
    }
    // Σ_t U V_tᵀ = U (Σ_t V_t)ᵀ
    let raw = state.u.dot(&v_sum.t());
    let r = (&raw + &raw.t()) * 0.5;
    Ok(ScoreMatrix { r, symmetrized: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Highest score first.
    Link,
    /// Lowest score first.
    Unlink,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub i: usize,
    pub j: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedPairs {
    pub pairs: Vec<ScoredPair>,
    pub direction: Direction,
}

/// Total order used everywhere pairs are ranked: by score in the given
/// direction, ties broken by `(i, j)` ascending.
pub fn rank_order(direction: Direction, a: &ScoredPair, b: &ScoredPair) -> Ordering {
    let by_score = match direction {
        Direction::Link => b.score.total_cmp(&a.score),
        Direction::Unlink => a.score.total_cmp(&b.score),
    };
    by_score.then_with(|| (a.i, a.j).cmp(&(b.i, b.j)))
}

fn rank(r: &ScoreMatrix, g_n: &CsrMatrix, connected: bool, direction: Direction, top: Option<usize>) -> RankedPairs {
    let n = r.nodes();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if (g_n.get(i, j) != 0.0) == connected {
                pairs.push(ScoredPair { i, j, score: r.score(i, j) });
            }
        }
    }
    pairs.sort_by(|a, b| rank_order(direction, a, b));
    if let Some(k) = top {
        pairs.truncate(k);
    }
    RankedPairs { pairs, direction }
}

/// Unconnected pairs of the last snapshot, most likely to link first.
pub fn rank_links(r: &ScoreMatrix, g_n: &CsrMatrix, top: Option<usize>) -> RankedPairs {
    rank(r, g_n, false, Direction::Link, top)
}

/// Connected pairs of the last snapshot, most likely to disappear first.
pub fn rank_unlinks(r: &ScoreMatrix, g_n: &CsrMatrix, top: Option<usize>) -> RankedPairs {
    rank(r, g_n, true, Direction::Unlink, top)
}

/// Writes `i,j,score` rows with node labels resolved through `labels`.
pub fn write_ranked_csv(path: impl AsRef<Path>, ranked: &RankedPairs, labels: &[String]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "i,j,score").map_err(io)?;
    for p in &ranked.pairs {
        writeln!(out, "{},{},{}", csv_field(&labels[p.i]), csv_field(&labels[p.j]), p.score).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsemat::DenseFactor;
    use ndarray::array;

    fn state(u: Array2<f64>, v: Vec<Array2<f64>>) -> FactorState {
        FactorState::new(
            DenseFactor::new(u).unwrap(),
            v.into_iter().map(|x| DenseFactor::new(x).unwrap()).collect(),
        )
        .unwrap()
    }

    fn scores(r: Array2<f64>) -> ScoreMatrix {
        ScoreMatrix { r, symmetrized: true }
    }

    #[test]
    fn score_matrix_examples() {
        let s = score_matrix(&state(Array2::eye(2), vec![array![[2.0, 0.0], [0.0, 3.0]]])).unwrap();
        assert_eq!(s.r, array![[2.0, 0.0], [0.0, 3.0]]);
        assert!(s.symmetrized);

        let u = array![[1.0, 0.5], [0.2, 0.3], [0.0, 0.0]];
        let v = array![[0.4, 0.1], [0.9, 0.6], [0.3, 0.2]];
        let one = score_matrix(&state(u.clone(), vec![v.clone()])).unwrap();
        let two = score_matrix(&state(u.clone(), vec![v.clone(), v])).unwrap();
        for (a, b) in two.r.iter().zip(one.r.iter()) {
            assert!((a - 2.0 * b).abs() < 1e-15);
        }
        assert_eq!(two.r, two.r.t());
        // a zero row of U only zeroes the raw row; symmetrization keeps half
        // of the raw column
        let half = score_matrix(&state(u.clone(), vec![v_row_nonzero()])).unwrap();
        let raw = u.dot(&v_row_nonzero().t());
        for j in 0..3 {
            assert_eq!(half.r[[2, j]], raw[[j, 2]] * 0.5);
        }
        let zero_row = score_matrix(&state(u, vec![array![[0.4, 0.1], [0.9, 0.6], [0.0, 0.0]]])).unwrap();
        assert!(zero_row.r.row(2).iter().all(|&x| x == 0.0));
        assert!(zero_row.r.column(2).iter().all(|&x| x == 0.0));
    }

    fn v_row_nonzero() -> Array2<f64> {
        array![[0.4, 0.1], [0.9, 0.6], [0.3, 0.2]]
    }

    #[test]
    fn links_skip_existing_edges() {
        let full = CsrMatrix::from_dense(&array![[0., 1., 1.], [1., 0., 1.], [1., 1., 0.]]);
        let r = scores(Array2::ones((3, 3)));
        assert!(rank_links(&r, &full, None).pairs.is_empty());
        assert_eq!(rank_unlinks(&r, &full, None).pairs.len(), 3);
    }

    #[test]
    fn link_order_and_ties() {
        let g = CsrMatrix::zeros(3, 3);
        let r = scores(array![[0., 0.9, 0.1], [0.9, 0., 0.1], [0.1, 0.1, 0.]]);
        let ranked = rank_links(&r, &g, None);
        assert_eq!((ranked.pairs[0].i, ranked.pairs[0].j), (0, 1));
        assert_eq!((ranked.pairs[1].i, ranked.pairs[1].j), (0, 2));

        let flat = rank_links(&scores(Array2::ones((3, 3))), &g, None);
        let order: Vec<_> = flat.pairs.iter().map(|p| (p.i, p.j)).collect();
        assert_eq!(order, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(rank_links(&r, &g, Some(1)).pairs.len(), 1);
    }

    #[test]
    fn unlink_order() {
        let g = CsrMatrix::from_dense(&array![[0., 1., 1.], [1., 0., 0.], [1., 0., 0.]]);
        let r = scores(array![[0., 0.1, 0.9], [0.1, 0., 0.5], [0.9, 0.5, 0.]]);
        let ranked = rank_unlinks(&r, &g, None);
        assert_eq!(ranked.direction, Direction::Unlink);
        assert_eq!((ranked.pairs[0].i, ranked.pairs[0].j), (0, 1));
        assert_eq!(ranked.pairs.len(), 2);
        assert!(rank_unlinks(&r, &CsrMatrix::zeros(3, 3), None).pairs.is_empty());
    }

    #[test]
    fn csv_output() {
        let g = CsrMatrix::zeros(2, 2);
        let ranked = rank_links(&scores(array![[0., 0.5], [0.5, 0.]]), &g, None);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("links.csv");
        write_ranked_csv(&path, &ranked, &["a,b".into(), "c".into()]).unwrap();
        assert_eq!(fs::read_to_string(path).unwrap(), "i,j,score\n\"a,b\",c,0.5\n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn case() -> impl Strategy<Value = (ScoreMatrix, CsrMatrix)> {
            (3usize..9).prop_flat_map(|n| {
                (
                    proptest::collection::vec(0u8..4, n * n),
                    proptest::collection::vec(any::<bool>(), n * n),
                )
                    .prop_map(move |(s, e)| {
                        let raw = Array2::from_shape_vec((n, n), s.into_iter().map(f64::from).collect()).unwrap();
                        let r = (&raw + &raw.t()) * 0.5;
                        let mut trip = Vec::new();
                        for i in 0..n {
                            for j in (i + 1)..n {
                                if e[i * n + j] {
                                    trip.push((i, j, 1.0));
                                    trip.push((j, i, 1.0));
                                }
                            }
                        }
                        (ScoreMatrix { r, symmetrized: true }, CsrMatrix::from_triplets(n, n, trip).unwrap())
                    })
            })
        }

        proptest! {
            #[test]
            fn candidate_sets_partition_all_pairs((r, g) in case()) {
                let n = r.nodes();
                let links = rank_links(&r, &g, None);
                let unlinks = rank_unlinks(&r, &g, None);
                prop_assert_eq!(links.pairs.len() + unlinks.pairs.len(), n * (n - 1) / 2);
                let mut all: Vec<_> = links.pairs.iter().chain(&unlinks.pairs).map(|p| (p.i, p.j)).collect();
                all.sort();
                all.dedup();
                prop_assert_eq!(all.len(), n * (n - 1) / 2);
                prop_assert!(all.iter().all(|&(i, j)| i < j));
                for w in links.pairs.windows(2) {
                    prop_assert!(rank_order(Direction::Link, &w[0], &w[1]) == Ordering::Less);
                }
                for w in unlinks.pairs.windows(2) {
                    prop_assert!(rank_order(Direction::Unlink, &w[0], &w[1]) == Ordering::Less);
                }
            }

            #[test]
            fn raising_a_score_never_demotes_a_link((r, g) in case(), pick in any::<prop::sample::Index>(), bump in 0.1f64..5.0) {
                let before = rank_links(&r, &g, None);
                prop_assume!(!before.pairs.is_empty());
                let target = before.pairs[pick.index(before.pairs.len())];
                let mut r2 = r.clone();
                r2.r[[target.i, target.j]] += bump;
                r2.r[[target.j, target.i]] += bump;
                let after = rank_links(&r2, &g, None);
                let pos = |rp: &RankedPairs| rp.pairs.iter().position(|p| (p.i, p.j) == (target.i, target.j)).unwrap();
                prop_assert!(pos(&after) <= pos(&before));

                let ub = rank_unlinks(&r, &g, None);
                prop_assume!(!ub.pairs.is_empty());
                let t2 = ub.pairs[pick.index(ub.pairs.len())];
                let mut r3 = r.clone();
                r3.r[[t2.i, t2.j]] += bump;
                r3.r[[t2.j, t2.i]] += bump;
                let ua = rank_unlinks(&r3, &g, None);
                let pos2 = |rp: &RankedPairs| rp.pairs.iter().position(|p| (p.i, p.j) == (t2.i, t2.j)).unwrap();
                prop_assert!(pos2(&ua) >= pos2(&ub));
            }
        }
    }
}
