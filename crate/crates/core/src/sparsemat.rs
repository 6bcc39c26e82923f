//! Sparse and dense matrix algebra used by the pipeline.
//!
//! Adjacency, degree and transition matrices are kept in compressed sparse
//! row form. Multi-step walk similarities may fill in, so [`Matrix`] lets a
//! product switch to a dense layout once its density crosses a threshold.
//! Factor matrices are always dense and non-negative ([`DenseFactor`]).

use std::ops::Deref;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

/// Guard added to every multiplicative-update denominator.
pub const EPS: f64 = 1e-12;

/// Density above which products are materialized densely.
pub const DEFAULT_DENSE_THRESHOLD: f64 = 0.25;

/// Compressed sparse row matrix of `f64`.
///
/// Column indices are sorted within each row, there are no duplicate
/// coordinates, and no explicit zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CsrMatrix {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for (i, &d) in diag.iter().enumerate() {
            if d != 0.0 {
                indices.push(i);
                values.push(d);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows: n,
            cols: n,
            indptr,
            indices,
            values,
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed and resulting zeros dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut items: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(i, j, v) in &items {
            if i >= rows || j >= cols {
                return Err(Error::OutOfRange {
                    index: if i >= rows { i } else { j },
                    len: if i >= rows { rows } else { cols },
                });
            }
            if !v.is_finite() {
                return Err(Error::Numerical(format!("non-finite value at ({i}, {j})")));
            }
        }
        items.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(items.len());
        let mut values: Vec<f64> = Vec::with_capacity(items.len());
        let mut row_of = Vec::with_capacity(items.len());
        for (i, j, v) in items {
            if let (Some(&last_j), Some(&last_i)) = (indices.last(), row_of.last()) {
                if last_i == i && last_j == j {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            indices.push(j);
            values.push(v);
            row_of.push(i);
        }
        // drop zeros (inputs or cancellations)
        let mut k = 0;
        for idx in 0..indices.len() {
            if values[idx] != 0.0 {
                indices[k] = indices[idx];
                values[k] = values[idx];
                row_of[k] = row_of[idx];
                k += 1;
            }
        }
        indices.truncate(k);
        values.truncate(k);
        row_of.truncate(k);
        for &i in &row_of {
            indptr[i + 1] += 1;
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Ok(CsrMatrix {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    /// Converts a dense array, keeping only nonzero entries.
    pub fn from_dense(a: &Array2<f64>) -> Self {
        let (rows, cols) = a.dim();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in a.outer_iter() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn density(&self) -> f64 {
        let cells = self.rows * self.cols;
        if cells == 0 {
            0.0
        } else {
            self.nnz() as f64 / cells as f64
        }
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, vals) = self.row(i);
        match idx.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (idx, vals) = self.row(i);
            idx.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (i, j, v) in self.iter() {
            let p = next[j];
            indices[p] = i;
            values[p] = v;
            next[j] += 1;
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for (i, j, v) in self.iter() {
            out[[i, j]] = v;
        }
        out
    }

    /// Exact structural and numerical symmetry check. Returns the first
    /// offending coordinate.
    pub fn first_asymmetry(&self) -> Option<(usize, usize)> {
        if self.rows != self.cols {
            return Some((self.rows, self.cols));
        }
        self.iter()
            .find(|&(i, j, v)| self.get(j, i) != v)
            .map(|(i, j, _)| (i, j))
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    pub fn scale(&self, s: f64) -> CsrMatrix {
        if s == 0.0 {
            return CsrMatrix::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Entrywise sum of two sparse matrices of the same shape.
    pub fn add(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                op: "add",
                left: self.shape(),
                right: other.shape(),
            });
        }
        CsrMatrix::from_triplets(self.rows, self.cols, self.iter().chain(other.iter()))
    }

    /// Scales row `i` by `factors[i]`.
    pub fn scale_rows(&self, factors: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for (i, f) in factors.iter().enumerate().take(self.rows) {
            let (a, b) = (self.indptr[i], self.indptr[i + 1]);
            for v in &mut out.values[a..b] {
                *v *= f;
            }
        }
        if out.values.contains(&0.0) {
            out = CsrMatrix::from_triplets(out.rows, out.cols, out.iter())
                .expect("rescaled entries stay in range");
        }
        out
    }
}

/// Sparse-times-dense product `A · B`.
pub fn spmm_dense(a: &CsrMatrix, b: &Array2<f64>) -> Result<Array2<f64>> {
    if a.cols() != b.nrows() {
        return Err(Error::Shape {
            op: "spmm",
            left: a.shape(),
            right: b.dim(),
        });
    }
    let mut out = Array2::zeros((a.rows(), b.ncols()));
    for i in 0..a.rows() {
        let (idx, vals) = a.row(i);
        let mut out_row = out.row_mut(i);
        for (&k, &v) in idx.iter().zip(vals) {
            out_row.scaled_add(v, &b.row(k));
        }
    }
    Ok(out)
}

/// Sparse-times-sparse product `A · B` (row-wise Gustavson with a dense
/// accumulator).
pub fn spmm_sparse(a: &CsrMatrix, b: &CsrMatrix) -> Result<CsrMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::Shape {
            op: "spmm",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let n = b.cols();
    let mut acc = vec![0.0f64; n];
    let mut touched = vec![false; n];
    let mut pattern: Vec<usize> = Vec::new();
    let mut indptr = Vec::with_capacity(a.rows() + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    for i in 0..a.rows() {
        let (aidx, avals) = a.row(i);
        for (&k, &av) in aidx.iter().zip(avals) {
            let (bidx, bvals) = b.row(k);
            for (&j, &bv) in bidx.iter().zip(bvals) {
                if !touched[j] {
                    touched[j] = true;
                    pattern.push(j);
                }
                acc[j] += av * bv;
            }
        }
        pattern.sort_unstable();
        for &j in &pattern {
            if acc[j] != 0.0 {
                indices.push(j);
                values.push(acc[j]);
            }
            acc[j] = 0.0;
            touched[j] = false;
        }
        pattern.clear();
        indptr.push(indices.len());
    }
    Ok(CsrMatrix {
        rows: a.rows(),
        cols: n,
        indptr,
        indices,
        values,
    })
}

/// Dense-times-sparse product `A · B`.
pub fn dense_spmm(a: &Array2<f64>, b: &CsrMatrix) -> Result<Array2<f64>> {
    if a.ncols() != b.rows() {
        return Err(Error::Shape {
            op: "spmm",
            left: a.dim(),
            right: b.shape(),
        });
    }
    let mut out = Array2::zeros((a.nrows(), b.cols()));
    for (a_row, mut out_row) in a.outer_iter().zip(out.outer_iter_mut()) {
        for (k, &av) in a_row.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let (bidx, bvals) = b.row(k);
            for (&j, &bv) in bidx.iter().zip(bvals) {
                out_row[j] += av * bv;
            }
        }
    }
    Ok(out)
}

/// A square-ish matrix that is stored sparse or dense depending on fill.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Sparse(CsrMatrix),
    Dense(Array2<f64>),
}

impl Matrix {
    /// Picks the layout from the density of a sparse matrix.
    pub fn from_sparse(m: CsrMatrix, dense_threshold: f64) -> Matrix {
        if m.density() > dense_threshold {
            Matrix::Dense(m.to_dense())
        } else {
            Matrix::Sparse(m)
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Matrix::Sparse(s) => s.shape(),
            Matrix::Dense(d) => d.dim(),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Matrix::Dense(_))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Matrix::Sparse(s) => s.get(i, j),
            Matrix::Dense(d) => d[[i, j]],
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        match self {
            Matrix::Sparse(s) => s.to_dense(),
            Matrix::Dense(d) => d.clone(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        match self {
            Matrix::Sparse(s) => Matrix::Sparse(s.transpose()),
            Matrix::Dense(d) => Matrix::Dense(d.t().to_owned()),
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        match self {
            Matrix::Sparse(s) => s.row_sums(),
            Matrix::Dense(d) => d.sum_axis(Axis(1)).to_vec(),
        }
    }

    /// Entries as `(i, j, value)`; zeros of a dense matrix are skipped.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        match self {
            Matrix::Sparse(s) => s.iter().collect(),
            Matrix::Dense(d) => d
                .indexed_iter()
                .filter(|(_, &v)| v != 0.0)
                .map(|((i, j), &v)| (i, j, v))
                .collect(),
        }
    }

    /// `self · b` for a dense right operand.
    pub fn mul_dense(&self, b: &Array2<f64>) -> Result<Array2<f64>> {
        match self {
            Matrix::Sparse(s) => spmm_dense(s, b),
            Matrix::Dense(d) => {
                if d.ncols() != b.nrows() {
                    return Err(Error::Shape {
                        op: "matmul",
                        left: d.dim(),
                        right: b.dim(),
                    });
                }
                Ok(d.dot(b))
            }
        }
    }

    /// `self · b` for a sparse right operand, densifying the result when it
    /// fills past `dense_threshold`.
    pub fn mul_sparse(&self, b: &CsrMatrix, dense_threshold: f64) -> Result<Matrix> {
        match self {
            Matrix::Sparse(s) => Ok(Matrix::from_sparse(spmm_sparse(s, b)?, dense_threshold)),
            Matrix::Dense(d) => Ok(Matrix::Dense(dense_spmm(d, b)?)),
        }
    }

    /// First coordinate where `self[i,j] != self[j,i]`, if any.
    pub fn first_asymmetry(&self) -> Option<(usize, usize)> {
        match self {
            Matrix::Sparse(s) => s.first_asymmetry(),
            Matrix::Dense(d) => {
                let (r, c) = d.dim();
                if r != c {
                    return Some((r, c));
                }
                for i in 0..r {
                    for j in (i + 1)..c {
                        if d[[i, j]] != d[[j, i]] {
                            return Some((i, j));
                        }
                    }
                }
                None
            }
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        let fold = |(lo, hi): (f64, f64), v: f64| (lo.min(v), hi.max(v));
        match self {
            Matrix::Sparse(s) => {
                let init = if s.nnz() < s.rows() * s.cols() {
                    (0.0, 0.0)
                } else {
                    (f64::INFINITY, f64::NEG_INFINITY)
                };
                s.values.iter().copied().fold(init, fold)
            }
            Matrix::Dense(d) => d
                .iter()
                .copied()
                .fold((f64::INFINITY, f64::NEG_INFINITY), fold),
        }
    }
}

/// A dense non-negative factor matrix (`|V| × m`).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFactor(Array2<f64>);

impl DenseFactor {
    /// Validates non-negativity and finiteness.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if let Some(((i, j), v)) = values
            .indexed_iter()
            .find(|(_, &v)| !(v.is_finite() && v >= 0.0))
        {
            return Err(Error::Numerical(format!(
                "factor entry ({i}, {j}) = {v} is negative or non-finite"
            )));
        }
        Ok(DenseFactor(values))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseFactor(Array2::zeros((rows, cols)))
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl Deref for DenseFactor {
    type Target = Array2<f64>;

    fn deref(&self) -> &Array2<f64> {
        &self.0
    }
}

/// Entrywise operations used by the multiplicative updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementwiseOp {
    Multiply,
    /// `x / (y + EPS)`
    Divide,
    /// Square root of the left operand; the right operand is ignored.
    Sqrt,
    Add,
}

/// Right-hand operand of [`elementwise`].
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Matrix(&'a Array2<f64>),
    Scalar(f64),
}

pub fn elementwise(op: ElementwiseOp, x: &Array2<f64>, y: Operand<'_>) -> Result<Array2<f64>> {
    let f = |a: f64, b: f64| match op {
        ElementwiseOp::Multiply => a * b,
        ElementwiseOp::Divide => a / (b + EPS),
        ElementwiseOp::Sqrt => a.sqrt(),
        ElementwiseOp::Add => a + b,
    };
    match y {
        Operand::Scalar(s) => Ok(x.mapv(|a| f(a, s))),
        Operand::Matrix(m) => {
            if op == ElementwiseOp::Sqrt {
                return Ok(x.mapv(f64::sqrt));
            }
            if x.dim() != m.dim() {
                return Err(Error::Shape {
                    op: "elementwise",
                    left: x.dim(),
                    right: m.dim(),
                });
            }
            let mut out = x.clone();
            ndarray::Zip::from(&mut out).and(m).for_each(|a, &b| *a = f(*a, b));
            Ok(out)
        }
    }
}

/// Diagonal matrix of row sums of a square symmetric matrix.
pub fn degree_matrix(a: &CsrMatrix) -> Result<CsrMatrix> {
    if a.rows() != a.cols() {
        return Err(Error::Shape {
            op: "degree_matrix",
            left: a.shape(),
            right: a.shape(),
        });
    }
    Ok(CsrMatrix::from_diagonal(&a.row_sums()))
}

/// `Σ_ij (X_ij − Y_ij)²` without densifying a sparse operand.
pub fn frobenius_sq_diff(x: &Matrix, y: &Matrix) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(Error::Shape {
            op: "frobenius_sq_diff",
            left: x.shape(),
            right: y.shape(),
        });
    }
    Ok(match (x, y) {
        (Matrix::Dense(a), Matrix::Dense(b)) => {
            a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum()
        }
        (Matrix::Sparse(s), Matrix::Dense(d)) | (Matrix::Dense(d), Matrix::Sparse(s)) => {
            sparse_dense_sq_diff(s, d)
        }
        (Matrix::Sparse(a), Matrix::Sparse(b)) => {
            let diff = a.add(&b.scale(-1.0))?;
            diff.values.iter().map(|v| v * v).sum()
        }
    })
}

/// `‖S − D‖²_F` for sparse `S` and dense `D`, visiting only the nonzero
/// pattern of `S` plus the entries of `D`.
pub fn sparse_dense_sq_diff(s: &CsrMatrix, d: &Array2<f64>) -> f64 {
    let mut total = 0.0;
    for (i, d_row) in d.outer_iter().enumerate() {
        let mut row_total: f64 = d_row.iter().map(|v| v * v).sum();
        let (idx, vals) = s.row(i);
        for (&j, &sv) in idx.iter().zip(vals) {
            let dv = d_row[j];
            row_total += (sv - dv) * (sv - dv) - dv * dv;
        }
        total += row_total;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn naive_matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((a.nrows(), b.ncols()));
        for i in 0..a.nrows() {
            for j in 0..b.ncols() {
                let mut s = 0.0;
                for k in 0..a.ncols() {
                    s += a[[i, k]] * b[[k, j]];
                }
                out[[i, j]] = s;
            }
        }
        out
    }

    #[test]
    fn triplets_merge_duplicates_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(
            2,
            3,
            vec![(0, 1, 1.0), (0, 1, 2.0), (1, 0, 0.0), (1, 2, 1.0), (1, 2, -1.0)],
        )
        .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 2), 0.0);
    }

    #[test]
    fn triplet_out_of_range_is_rejected() {
        assert!(CsrMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn spmm_identity_and_zero() {
        let b = array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(spmm_dense(&CsrMatrix::identity(2), &b).unwrap(), b);
        assert_eq!(
            spmm_dense(&CsrMatrix::zeros(2, 2), &b).unwrap(),
            Array2::<f64>::zeros((2, 2))
        );
    }

    #[test]
    fn spmm_swap_rows() {
        let a = CsrMatrix::from_dense(&array![[0.0, 1.0], [1.0, 0.0]]);
        let b = array![[1.0, 2.0], [3.0, 4.0]];
        let expected = array![[3.0, 4.0], [1.0, 2.0]];
        assert_eq!(spmm_dense(&a, &b).unwrap(), expected);
        let sb = CsrMatrix::from_dense(&b);
        assert_eq!(spmm_sparse(&a, &sb).unwrap().to_dense(), expected);
        assert_eq!(dense_spmm(&b, &a).unwrap(), array![[2.0, 1.0], [4.0, 3.0]]);
    }

    #[test]
    fn spmm_dimension_mismatch() {
        let a = CsrMatrix::identity(3);
        let b = Array2::<f64>::zeros((2, 2));
        assert!(matches!(spmm_dense(&a, &b), Err(Error::Shape { .. })));
        assert!(spmm_sparse(&a, &CsrMatrix::identity(2)).is_err());
        assert!(dense_spmm(&b, &a).is_err());
    }

    #[test]
    fn elementwise_examples() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let ones = Array2::ones((2, 2));
        assert_eq!(
            elementwise(ElementwiseOp::Multiply, &x, Operand::Matrix(&ones)).unwrap(),
            x
        );
        let q = elementwise(ElementwiseOp::Divide, &x, Operand::Matrix(&x)).unwrap();
        for v in q.iter() {
            assert!((v - 1.0).abs() <= 1e-9);
        }
        let s = elementwise(ElementwiseOp::Sqrt, &array![[4.0, 9.0]], Operand::Scalar(0.0)).unwrap();
        assert_eq!(s, array![[2.0, 3.0]]);
        let added = elementwise(ElementwiseOp::Add, &x, Operand::Scalar(1.0)).unwrap();
        assert_eq!(added, array![[2.0, 3.0], [4.0, 5.0]]);
        let bad = Array2::<f64>::zeros((1, 2));
        assert!(elementwise(ElementwiseOp::Add, &x, Operand::Matrix(&bad)).is_err());
    }

    #[test]
    fn divide_by_zero_is_guarded() {
        let x = array![[1.0, 0.0]];
        let z = Array2::zeros((1, 2));
        let q = elementwise(ElementwiseOp::Divide, &x, Operand::Matrix(&z)).unwrap();
        assert!(q.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn degree_matrix_examples() {
        let tri = CsrMatrix::from_dense(&array![[0., 1., 1.], [1., 0., 1.], [1., 1., 0.]]);
        assert_eq!(degree_matrix(&tri).unwrap().to_dense(), Array2::from_diag(&array![2., 2., 2.]));
        let edge = CsrMatrix::from_dense(&array![[0., 1.], [1., 0.]]);
        assert_eq!(degree_matrix(&edge).unwrap().to_dense(), Array2::<f64>::eye(2));
        let iso = CsrMatrix::from_dense(&array![[0., 1., 0.], [1., 0., 0.], [0., 0., 0.]]);
        assert_eq!(degree_matrix(&iso).unwrap().get(2, 2), 0.0);
        assert!(degree_matrix(&CsrMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn frobenius_examples() {
        let x = Matrix::Dense(array![[1.0, 0.0]]);
        let y = Matrix::Dense(array![[0.0, 1.0]]);
        assert_eq!(frobenius_sq_diff(&x, &x).unwrap(), 0.0);
        assert_eq!(frobenius_sq_diff(&x, &y).unwrap(), 2.0);
        let a = Matrix::Dense(array![[3.0]]);
        let b = Matrix::Dense(array![[1.0]]);
        assert_eq!(frobenius_sq_diff(&a, &b).unwrap(), 4.0);
        let xs = Matrix::Sparse(CsrMatrix::from_dense(&array![[1.0, 0.0]]));
        let ys = Matrix::Sparse(CsrMatrix::from_dense(&array![[0.0, 1.0]]));
        assert_eq!(frobenius_sq_diff(&xs, &y).unwrap(), 2.0);
        assert_eq!(frobenius_sq_diff(&x, &ys).unwrap(), 2.0);
        assert_eq!(frobenius_sq_diff(&xs, &ys).unwrap(), 2.0);
        assert!(frobenius_sq_diff(&x, &a).is_err());
    }

    #[test]
    fn transpose_roundtrip() {
        let a = array![[0.0, 1.0, 2.0], [3.0, 0.0, 0.0]];
        let s = CsrMatrix::from_dense(&a);
        assert_eq!(s.transpose().to_dense(), a.t().to_owned());
        assert_eq!(s.transpose().transpose(), s);
    }

    #[test]
    fn dense_factor_rejects_negative() {
        assert!(DenseFactor::new(array![[1.0, -0.5]]).is_err());
        assert!(DenseFactor::new(array![[1.0, f64::NAN]]).is_err());
        assert!(DenseFactor::new(array![[1.0, 0.0]]).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sparse_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
            proptest::collection::vec(
                prop_oneof![3 => Just(0.0), 1 => -5.0f64..5.0],
                rows * cols,
            )
            .prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
        }

        fn triple() -> impl Strategy<Value = (Array2<f64>, Array2<f64>)> {
            (1usize..50, 1usize..50, 1usize..50)
                .prop_flat_map(|(r, k, c)| (sparse_matrix(r, k), sparse_matrix(k, c)))
        }

        fn close(a: &Array2<f64>, b: &Array2<f64>) -> bool {
            a.iter().zip(b.iter()).all(|(x, y)| {
                let scale = x.abs().max(y.abs()).max(1.0);
                (x - y).abs() <= 1e-12 * scale
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn products_match_naive_oracle((a, b) in triple()) {
                let oracle = naive_matmul(&a, &b);
                let sa = CsrMatrix::from_dense(&a);
                let sb = CsrMatrix::from_dense(&b);
                prop_assert!(close(&spmm_dense(&sa, &b).unwrap(), &oracle));
                prop_assert!(close(&spmm_sparse(&sa, &sb).unwrap().to_dense(), &oracle));
                prop_assert!(close(&dense_spmm(&a, &sb).unwrap(), &oracle));
            }

            #[test]
            fn divide_never_produces_non_finite(
                x in sparse_matrix(4, 4),
                y in sparse_matrix(4, 4).prop_map(|m| m.mapv(f64::abs)),
            ) {
                let q = elementwise(ElementwiseOp::Divide, &x, Operand::Matrix(&y)).unwrap();
                prop_assert!(q.iter().all(|v| v.is_finite()));
            }

            #[test]
            fn sparse_frobenius_matches_dense(x in sparse_matrix(6, 5), y in sparse_matrix(6, 5)) {
                let dense = frobenius_sq_diff(&Matrix::Dense(x.clone()), &Matrix::Dense(y.clone())).unwrap();
                let mixed = frobenius_sq_diff(&Matrix::Sparse(CsrMatrix::from_dense(&x)), &Matrix::Dense(y)).unwrap();
                prop_assert!((dense - mixed).abs() <= 1e-9 * dense.max(1.0));
            }
        }
    }
}
