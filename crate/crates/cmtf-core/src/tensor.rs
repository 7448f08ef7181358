//! Dense N-way tensors and the algebraic kernels everything else builds on:
//! matricization, Khatri-Rao products, the Kruskal operator, and the usual
//! elementwise/inner-product operations.
//!
//! Storage is generalized column-major: the first index varies fastest. This
//! makes mode-0 matricization a pure reshape and pins the column ordering of
//! every matricization so that `X_(0) = A (C ⊙ B)^T` holds exactly for a
//! 3-way Kruskal tensor.

use crate::{CmtfError, Result};

/// Dense 2-D real matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CmtfError::ShapeMismatch(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Row-major nested construction, mostly for tests and small literals.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// self * other
    pub fn dot(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b == 0.0 {
                    continue;
                }
                let a_col = self.col(k);
                let o_col = out.col_mut(j);
                for i in 0..a_col.len() {
                    o_col[i] += a_col[i] * b;
                }
            }
        }
        out
    }

    /// self^T * other
    pub fn t_dot(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "inner dimensions");
        let mut out = Matrix::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            for i in 0..self.cols {
                let mut s = 0.0;
                let a = self.col(i);
                let b = other.col(j);
                for k in 0..self.rows {
                    s += a[k] * b[k];
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    /// self * other^T
    pub fn dot_t(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "inner dimensions");
        let mut out = Matrix::zeros(self.rows, other.rows);
        for k in 0..self.cols {
            let a = self.col(k);
            for j in 0..other.rows {
                let b = other[(j, k)];
                if b == 0.0 {
                    continue;
                }
                let o_col = out.col_mut(j);
                for i in 0..a.len() {
                    o_col[i] += a[i] * b;
                }
            }
        }
        out
    }

    /// Gram matrix self^T self.
    pub fn gram(&self) -> Matrix {
        self.t_dot(self)
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn scale_col(&mut self, j: usize, s: f64) {
        for v in self.col_mut(j) {
            *v *= s;
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn col_norm(&self, j: usize) -> f64 {
        self.col(j).iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// vec(M): stacks the columns into a single vector of length rows*cols.
pub fn vectorize(m: &Matrix) -> Vec<f64> {
    m.data.clone()
}

/// Dense order-N tensor, first index varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        DenseTensor {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_data(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&s| s == 0) {
            return Err(CmtfError::InvalidArgument(format!(
                "invalid tensor shape {:?}",
                shape
            )));
        }
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(CmtfError::ShapeMismatch(format!(
                "tensor data length {} does not match shape {:?}",
                data.len(),
                shape
            )));
        }
        Ok(DenseTensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// A matrix viewed as a 2-way tensor (same column-major layout).
    pub fn from_matrix(m: &Matrix) -> Self {
        DenseTensor {
            shape: vec![m.rows(), m.cols()],
            data: m.data().to_vec(),
        }
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Sum of elementwise products of two same-shape tensors.
pub fn inner(x: &DenseTensor, y: &DenseTensor) -> Result<f64> {
    if x.shape != y.shape {
        return Err(CmtfError::ShapeMismatch(format!(
            "inner: {:?} vs {:?}",
            x.shape, y.shape
        )));
    }
    Ok(x.data.iter().zip(&y.data).map(|(a, b)| a * b).sum())
}

/// Elementwise product of two same-shape tensors.
pub fn hadamard(x: &DenseTensor, y: &DenseTensor) -> Result<DenseTensor> {
    if x.shape != y.shape {
        return Err(CmtfError::ShapeMismatch(format!(
            "hadamard: {:?} vs {:?}",
            x.shape, y.shape
        )));
    }
    let data = x.data.iter().zip(&y.data).map(|(a, b)| a * b).collect();
    Ok(DenseTensor {
        shape: x.shape.clone(),
        data,
    })
}

/// Mode-n matricization X_(n): rows are the mode-n index, columns run over
/// the remaining indices with lower-numbered modes varying fastest.
pub fn matricize(x: &DenseTensor, mode: usize) -> Result<Matrix> {
    let order = x.order();
    if mode >= order {
        return Err(CmtfError::InvalidArgument(format!(
            "mode {} out of range for order-{} tensor",
            mode, order
        )));
    }
    let rows = x.shape[mode];
    let cols = x.len() / rows;
    if mode == 0 {
        // First index fastest: the data is already laid out as the unfolding.
        return Ok(Matrix {
            rows,
            cols,
            data: x.data.clone(),
        });
    }
    let mut out = Matrix::zeros(rows, cols);
    let mut idx = vec![0usize; order];
    for &v in &x.data {
        let mut col = 0;
        let mut stride = 1;
        for n in 0..order {
            if n != mode {
                col += idx[n] * stride;
                stride *= x.shape[n];
            }
        }
        out[(idx[mode], col)] = v;
        increment_index(&mut idx, &x.shape);
    }
    Ok(out)
}

/// Inverse of [`matricize`]: folds a mode-n unfolding back into a tensor.
pub fn dematricize(m: &Matrix, shape: &[usize], mode: usize) -> Result<DenseTensor> {
    if mode >= shape.len() {
        return Err(CmtfError::InvalidArgument(format!(
            "mode {} out of range for shape {:?}",
            mode, shape
        )));
    }
    let total: usize = shape.iter().product();
    if m.rows() != shape[mode] || m.rows() * m.cols() != total {
        return Err(CmtfError::ShapeMismatch(format!(
            "{}x{} matrix cannot fold into shape {:?} at mode {}",
            m.rows(),
            m.cols(),
            shape,
            mode
        )));
    }
    if mode == 0 {
        return DenseTensor::from_data(shape, m.data().to_vec());
    }
    let mut out = DenseTensor::zeros(shape);
    let order = shape.len();
    let mut idx = vec![0usize; order];
    for v in out.data.iter_mut() {
        let mut col = 0;
        let mut stride = 1;
        for n in 0..order {
            if n != mode {
                col += idx[n] * stride;
                stride *= shape[n];
            }
        }
        *v = m[(idx[mode], col)];
        increment_index(&mut idx, shape);
    }
    Ok(out)
}

fn increment_index(idx: &mut [usize], shape: &[usize]) {
    for (i, s) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < *s {
            return;
        }
        *i = 0;
    }
}

/// Columnwise Kronecker product A ⊙ B; column k is a_k ⊗ b_k with the B index
/// varying fastest.
pub fn khatri_rao(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.cols() {
        return Err(CmtfError::ShapeMismatch(format!(
            "khatri_rao: {} vs {} columns",
            a.cols(),
            b.cols()
        )));
    }
    let mut out = Matrix::zeros(a.rows() * b.rows(), a.cols());
    for k in 0..a.cols() {
        let (ac, bc) = (a.col(k), b.col(k));
        let oc = out.col_mut(k);
        let mut p = 0;
        for &av in ac {
            for &bv in bc {
                oc[p] = av * bv;
                p += 1;
            }
        }
    }
    Ok(out)
}

/// A^(-skip) = A^(N-1) ⊙ ... ⊙ A^(skip+1) ⊙ A^(skip-1) ⊙ ... ⊙ A^(0),
/// computed in one pass over the composite row index (lower modes fastest).
pub fn khatri_rao_complement(factors: &[Matrix], skip: usize) -> Result<Matrix> {
    if skip >= factors.len() {
        return Err(CmtfError::InvalidArgument(format!(
            "skip {} out of range for {} factors",
            skip,
            factors.len()
        )));
    }
    let rank = factors[0].cols();
    if factors.iter().any(|f| f.cols() != rank) {
        return Err(CmtfError::ShapeMismatch(
            "khatri_rao_complement: factors disagree on column count".into(),
        ));
    }
    let kept: Vec<&Matrix> = factors
        .iter()
        .enumerate()
        .filter(|&(n, _)| n != skip)
        .map(|(_, f)| f)
        .collect();
    let rows: usize = kept.iter().map(|f| f.rows()).product::<usize>().max(1);
    let mut out = Matrix::zeros(rows, rank);
    let mut idx = vec![0usize; kept.len()];
    for row in 0..rows {
        for r in 0..rank {
            let mut p = 1.0;
            for (f, &i) in kept.iter().zip(&idx) {
                p *= f[(i, r)];
            }
            out[(row, r)] = p;
        }
        for (i, f) in idx.iter_mut().zip(&kept) {
            *i += 1;
            if *i < f.rows() {
                break;
            }
            *i = 0;
        }
    }
    Ok(out)
}

/// Kruskal operator: the full tensor generated by factor matrices and
/// optional per-component weights (defaulting to ones).
pub fn kruskal_to_full(factors: &[Matrix], weights: Option<&[f64]>) -> Result<DenseTensor> {
    if factors.is_empty() {
        return Err(CmtfError::InvalidArgument("no factor matrices".into()));
    }
    let rank = factors[0].cols();
    if factors.iter().any(|f| f.cols() != rank) {
        return Err(CmtfError::ShapeMismatch(
            "kruskal_to_full: factors disagree on column count".into(),
        ));
    }
    if let Some(w) = weights {
        if w.len() != rank {
            return Err(CmtfError::ShapeMismatch(format!(
                "{} weights for rank {}",
                w.len(),
                rank
            )));
        }
    }
    let shape: Vec<usize> = factors.iter().map(|f| f.rows()).collect();
    let mut first = factors[0].clone();
    if let Some(w) = weights {
        for (r, &wr) in w.iter().enumerate() {
            first.scale_col(r, wr);
        }
    }
    let kr = khatri_rao_complement(factors, 0)?;
    let unfolded = first.dot_t(&kr);
    dematricize(&unfolded, &shape, 0)
}
