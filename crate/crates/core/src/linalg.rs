//! Small dense linear algebra: a column-major matrix, vector helpers,
//! Gaussian elimination and Gram-Schmidt.
//!
//! Everything here is desk-scale (dimensions up to a few hundred). Samples
//! are stored as columns, so `col(t)` of a feature matrix is the sample
//! `x_t` as a contiguous slice.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[S]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix storage",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<S>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    what: "matrix column",
                    expected: rows,
                    found: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    /// Builds a matrix from row vectors.
    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: cols,
                    found: r.len(),
                });
            }
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[S] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [S] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[S]> + '_ {
        (0..self.cols).map(move |j| self.col(j))
    }

    pub fn row(&self, i: usize) -> Vec<S> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                what: "matrix product inner dimension",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            let dst = out.col_mut(j);
            for (k, &b) in oc.iter().enumerate() {
                if b == S::zero() {
                    continue;
                }
                axpy(b, self.col(k), dst);
            }
        }
        Ok(out)
    }

    /// `A v`.
    pub fn matvec(&self, v: &[S]) -> Result<Vec<S>> {
        check_len("matrix-vector operand", self.cols, v.len())?;
        let mut out = vec![S::zero(); self.rows];
        for (j, &vj) in v.iter().enumerate() {
            axpy(vj, self.col(j), &mut out);
        }
        Ok(out)
    }

    /// `Aᵀ v`.
    pub fn tr_matvec(&self, v: &[S]) -> Result<Vec<S>> {
        check_len("transposed matrix-vector operand", self.rows, v.len())?;
        Ok(self.columns().map(|c| dot(c, v)).collect())
    }

    /// Gram matrix `AᵀA` (inner products between columns).
    pub fn gram(&self) -> Self {
        let mut g = Self::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let v = dot(self.col(i), self.col(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Outer-product sum `A Aᵀ` (covariance-type matrix over rows).
    pub fn outer_gram(&self) -> Self {
        let mut c = Self::zeros(self.rows, self.rows);
        for col in self.columns() {
            for j in 0..self.rows {
                let cj = col[j];
                if cj == S::zero() {
                    continue;
                }
                for i in j..self.rows {
                    c[(i, j)] = c[(i, j)] + col[i] * cj;
                }
            }
        }
        for j in 0..self.rows {
            for i in j + 1..self.rows {
                c[(j, i)] = c[(i, j)];
            }
        }
        c
    }

    pub fn scaled(&self, s: S) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(S, S) -> S) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                what: "elementwise matrix operand",
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> S {
        norm2(&self.data)
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> S {
        let mut worst = S::zero();
        for j in 0..self.cols.min(self.rows) {
            for i in j + 1..self.rows.min(self.cols) {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm2<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_inf<S: Scalar>(a: &[S]) -> S {
    a.iter().fold(S::zero(), |m, v| m.max(v.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// Fails with [`Error::Singular`] when a pivot falls below
/// `n * eps * max|A|`.
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<Vec<S>> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            what: "linear system (square matrix)",
            expected: n,
            found: a.ncols(),
        });
    }
    check_len("linear system right-hand side", n, b.len())?;

    // Row-major working copy with the right-hand side appended.
    let w = n + 1;
    let mut aug = vec![S::zero(); n * w];
    for i in 0..n {
        for j in 0..n {
            aug[i * w + j] = a[(i, j)];
        }
        aug[i * w + n] = b[i];
    }
    let scale = a.as_slice().iter().fold(S::zero(), |m, v| m.max(v.abs()));
    let tiny = S::epsilon() * S::from_count(n.max(1)) * scale;

    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, aug[i * w + k].abs()))
            .fold((k, -S::one()), |acc, c| if c.1 > acc.1 { c } else { acc });
        if !(pmax > tiny) {
            return Err(Error::Singular { pivot: k });
        }
        if p != k {
            for j in 0..w {
                aug.swap(k * w + j, p * w + j);
            }
        }
        let piv = aug[k * w + k];
        for i in k + 1..n {
            let f = aug[i * w + k] / piv;
            if f == S::zero() {
                continue;
            }
            for j in k..w {
                aug[i * w + j] = aug[i * w + j] - f * aug[k * w + j];
            }
        }
    }

    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let mut s = aug[i * w + n];
        for j in i + 1..n {
            s = s - aug[i * w + j] * x[j];
        }
        x[i] = s / aug[i * w + i];
    }
    Ok(x)
}

/// Solves `A X = B` column by column.
pub fn solve_matrix<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    let cols = b
        .columns()
        .map(|c| solve(a, c))
        .collect::<Result<Vec<_>>>()?;
    if cols.is_empty() {
        return Ok(Matrix::zeros(a.ncols(), 0));
    }
    Matrix::from_columns(&cols)
}

/// Modified Gram-Schmidt on the columns of `a`.
///
/// Columns whose residual norm drops below `rank_tol` times the largest
/// input column norm are discarded, so the result has `rank(a)` columns.
pub fn orthonormalize_columns<S: Scalar>(a: &Matrix<S>, rank_tol: S) -> Matrix<S> {
    let ref_norm = a.columns().map(norm2).fold(S::zero(), S::max);
    let mut basis: Vec<Vec<S>> = Vec::new();
    for c in a.columns() {
        let mut v = c.to_vec();
        // Two passes keep the basis orthonormal to working precision.
        for _ in 0..2 {
            for q in &basis {
                let r = dot(q, &v);
                axpy(-r, q, &mut v);
            }
        }
        let nv = norm2(&v);
        if nv > rank_tol * ref_norm && nv > S::zero() {
            v.iter_mut().for_each(|e| *e = *e / nv);
            basis.push(v);
        }
    }
    if basis.is_empty() {
        return Matrix::zeros(a.nrows(), 0);
    }
    Matrix::from_columns(&basis).expect("columns share a length")
}
