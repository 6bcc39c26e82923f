//! The sparse and dense building blocks behind the walks and updates.
//!
//! cargo run --example sparse_algebra

use ndarray::array;
use tempolink::sparsemat::{degree_matrix, elementwise, spmm_dense, spmm_sparse, CsrMatrix, ElementwiseOp, Matrix, Operand};

fn main() -> tempolink::Result<()> {
    // path 0 - 1 - 2
    let a = CsrMatrix::from_triplets(3, 3, [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)])?;
    println!("nnz = {}, density = {:.3}, symmetric = {}", a.nnz(), a.density(), a.is_symmetric());
    println!("degrees = {:?}", degree_matrix(&a)?.to_dense().diag().to_vec());

    let a2 = spmm_sparse(&a, &a)?;
    println!("A² =\n{}", a2.to_dense());

    let u = array![[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]];
    println!("A·U =\n{}", spmm_dense(&a, &u)?);

    // storage switches to dense once the fill passes the threshold
    println!("A² stored densely at threshold 0.5: {}", Matrix::from_sparse(a2, 0.5).is_dense());

    let ratio = elementwise(ElementwiseOp::Divide, &u, Operand::Scalar(0.0))?;
    println!("U / (0 + ε) stays finite: {}", ratio.iter().all(|x| x.is_finite()));
    Ok(())
}
