use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{resolvable_tol, Scalar};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigResult<S> {
    /// Eigenvalues in descending order.
    pub values: Vec<S>,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: Matrix<S>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigensolver for dense symmetric matrices.
///
/// Sweeps over every off-diagonal pair `(p, q)` and annihilates `a_pq` with
/// a plane rotation, accumulating the rotations into the eigenvector matrix.
/// Stops once the off-diagonal Frobenius mass is below `1e-12 ‖A‖_F`.
pub fn symmetric_eig<S: Scalar>(a: &Matrix<S>) -> Result<EigResult<S>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            what: "eigensolver input (square matrix)",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("eigensolver input"));
    }
    let n = a.nrows();
    let scale = a.frobenius_norm();
    let sym_tol = resolvable_tol::<S>(1e-10, 16.0) * scale.max(S::one());
    let asym = a.asymmetry();
    if asym > sym_tol {
        return Err(Error::Asymmetric(asym.to_f64_lossy()));
    }

    let mut m = a.clone();
    // Symmetrize so rotations act on an exactly symmetric matrix.
    for j in 0..n {
        for i in j + 1..n {
            let v = S::half() * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let mut v = Matrix::identity(n);
    let threshold = resolvable_tol::<S>(1e-12, 4.0) * scale;

    let mut sweeps = 0;
    while off_diagonal_norm(&m) > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NotConverged {
                iters: sweeps,
                residual: off_diagonal_norm(&m).to_f64_lossy(),
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(j, j)]
            .partial_cmp(&m[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let cols: Vec<Vec<S>> = order.iter().map(|&i| v.col(i).to_vec()).collect();
    let vectors = if n == 0 {
        Matrix::zeros(0, 0)
    } else {
        Matrix::from_columns(&cols)?
    };
    Ok(EigResult {
        values,
        vectors,
        sweeps,
    })
}

fn off_diagonal_norm<S: Scalar>(m: &Matrix<S>) -> S {
    let n = m.nrows();
    let mut acc = S::zero();
    for j in 0..n {
        for i in 0..n {
            if i != j {
                acc = acc + m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc.sqrt()
}

fn rotate<S: Scalar>(m: &mut Matrix<S>, v: &mut Matrix<S>, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == S::zero() {
        return;
    }
    let theta = (m[(q, q)] - m[(p, p)]) / (S::c(2.0) * apq);
    let t = if theta.is_infinite() {
        S::zero()
    } else {
        let sign = if theta >= S::zero() { S::one() } else { -S::one() };
        sign / (theta.abs() + (theta * theta + S::one()).sqrt())
    };
    let c = S::one() / (t * t + S::one()).sqrt();
    let s = t * c;
    let n = m.nrows();
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = c * akp - s * akq;
        m[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = c * apk - s * aqk;
        m[(q, k)] = s * apk + c * aqk;
    }
    m[(p, q)] = S::zero();
    m[(q, p)] = S::zero();
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Leading principal subspace of a data matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaSubspace<S> {
    /// `n × m` orthonormal basis.
    pub basis: Matrix<S>,
    /// Top eigenvalues of the sample covariance, descending.
    pub values: Vec<S>,
    /// Set when `λ_m − λ_{m+1} < 1e-10`: the subspace is not unique.
    pub degenerate: bool,
}

/// Top-`m` eigenvectors of the sample covariance `(1/T) X Xᵀ`.
pub fn pca_subspace<S: Scalar>(x: &Matrix<S>, m: usize) -> Result<PcaSubspace<S>> {
    let n = x.nrows();
    if m > n {
        return Err(Error::param("m", m as f64, "must not exceed the input dimension"));
    }
    let t = S::from_count(x.ncols().max(1));
    let cov = x.outer_gram().scaled(S::one() / t);
    let eig = symmetric_eig(&cov)?;
    let degenerate = m > 0 && m < n && eig.values[m - 1] - eig.values[m] < S::c(1e-10);
    let cols: Vec<Vec<S>> = (0..m).map(|j| eig.vectors.col(j).to_vec()).collect();
    let basis = if m == 0 {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(&cols)?
    };
    Ok(PcaSubspace {
        basis,
        values: eig.values[..m].to_vec(),
        degenerate,
    })
}
