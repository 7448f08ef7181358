//! Dense least-squares and truncated-SVD helpers backed by nalgebra.

use crate::tensor::Matrix;
use crate::{CmtfError, Result};
use nalgebra::DMatrix;

/// Relative eigenvalue cutoff for pseudoinverse solves. Overfactored ALS
/// subproblems are nearly singular by design, so a hard failure is not an
/// option.
const PINV_RANK_TOL: f64 = 1e-12;

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.data())
}

fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_data(m.nrows(), m.ncols(), m.as_slice().to_vec()).unwrap()
}

/// Pseudoinverse of a symmetric positive semidefinite Gram matrix, dropping
/// eigenvalues below `PINV_RANK_TOL` relative to the largest.
pub fn pinv_gram(gram: &Matrix) -> Matrix {
    assert_eq!(gram.rows(), gram.cols(), "gram must be square");
    let eig = to_na(gram).symmetric_eigen();
    let max_abs = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let cutoff = max_abs * PINV_RANK_TOL;
    let n = gram.rows();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > cutoff {
            let v = eig.eigenvectors.column(k);
            out += v * v.transpose() / lambda;
        }
    }
    from_na(&out)
}

/// Minimizes ||rhs - result * coefficient^T||_F over `result`, via normal
/// equations with a pseudoinverse fallback for rank-deficient coefficients.
pub fn least_squares_solve(coefficient: &Matrix, rhs: &Matrix) -> Matrix {
    assert_eq!(
        rhs.cols(),
        coefficient.rows(),
        "rhs columns must match coefficient rows"
    );
    let gram = coefficient.gram();
    let cross = rhs.dot(coefficient);
    cross.dot(&pinv_gram(&gram))
}

/// Top-k singular triplets of `y`: (U, sigma, V) with Y ≈ U diag(sigma) V^T.
pub fn truncated_svd(y: &Matrix, k: usize) -> Result<(Matrix, Vec<f64>, Matrix)> {
    if k == 0 || k > y.rows().min(y.cols()) {
        return Err(CmtfError::InvalidArgument(format!(
            "k = {} out of range for a {}x{} matrix",
            k,
            y.rows(),
            y.cols()
        )));
    }
    let svd = to_na(y).svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    // nalgebra does not promise an ordering; sort indices by singular value.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let mut u_out = Matrix::zeros(y.rows(), k);
    let mut v_out = Matrix::zeros(y.cols(), k);
    let mut s_out = Vec::with_capacity(k);
    for (j, &idx) in order.iter().take(k).enumerate() {
        s_out.push(svd.singular_values[idx]);
        for i in 0..y.rows() {
            u_out[(i, j)] = u[(i, idx)];
        }
        for i in 0..y.cols() {
            v_out[(i, j)] = vt[(idx, i)];
        }
    }
    Ok((u_out, s_out, v_out))
}
