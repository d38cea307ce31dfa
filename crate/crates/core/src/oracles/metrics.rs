use crate::duality::{DualModel, DualParams};
use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, norm2, Matrix};
use crate::oracles::symmetric_eig;
use crate::scalar::Scalar;

/// Relative eigenvalue threshold for the rank of a column space.
pub const RANK_TOL: f64 = 1e-10;

/// Primal minus dual objective at `(w, z)` under the shared scaling.
///
/// Nonnegative up to rounding for every feasible `z` (weak duality).
pub fn duality_gap<S: Scalar>(
    model: DualModel,
    x: &Matrix<S>,
    y: &[S],
    w: &[S],
    z: &[S],
    params: &DualParams<S>,
) -> Result<S> {
    let dual = model.dual_objective(z, x, y, params)?;
    let primal = model.matched_primal(w, x, y, params)?;
    Ok(primal - dual)
}

/// Orthonormal basis of the column space of `x`, with rank decided by
/// eigenvalues of `X Xᵀ` above `RANK_TOL · λ_max`.
pub fn column_space<S: Scalar>(x: &Matrix<S>) -> Result<Matrix<S>> {
    let eig = symmetric_eig(&x.outer_gram())?;
    let top = eig.values.first().copied().unwrap_or_else(S::zero);
    let keep: Vec<Vec<S>> = eig
        .values
        .iter()
        .enumerate()
        .take_while(|(_, &v)| top > S::zero() && v > S::c(RANK_TOL) * top)
        .map(|(j, _)| eig.vectors.col(j).to_vec())
        .collect();
    if keep.is_empty() {
        return Ok(Matrix::zeros(x.nrows(), 0));
    }
    Matrix::from_columns(&keep)
}

/// `‖w − P_X w‖ / ‖w‖`: how far `w` lies outside the span of the samples.
pub fn span_residual<S: Scalar>(w: &[S], x: &Matrix<S>) -> Result<S> {
    check_len("weights vs feature dimension", x.nrows(), w.len())?;
    let q = column_space(x)?;
    let mut r = w.to_vec();
    for c in q.columns() {
        let a = dot(c, w);
        for (ri, &ci) in r.iter_mut().zip(c) {
            *ri = *ri - a * ci;
        }
    }
    Ok(norm2(&r) / norm2(w).max(S::c(1e-30)))
}

/// Largest entry of `|BᵀB − I|`.
pub fn orthonormality_defect<S: Scalar>(b: &Matrix<S>) -> S {
    let g = b.gram();
    let mut worst = S::zero();
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let e = if i == j { S::one() } else { S::zero() };
            worst = worst.max((g[(i, j)] - e).abs());
        }
    }
    worst
}

fn projector<S: Scalar>(b: &Matrix<S>) -> Matrix<S> {
    b.outer_gram()
}

/// `‖B₁B₁ᵀ − B₂B₂ᵀ‖_F / √(2m)`, in `[0, 1]`.
pub fn subspace_error<S: Scalar>(b1: &Matrix<S>, b2: &Matrix<S>) -> Result<S> {
    if b1.shape() != b2.shape() {
        return Err(Error::DimensionMismatch {
            what: "subspace bases",
            expected: b1.nrows() * b1.ncols(),
            found: b2.nrows() * b2.ncols(),
        });
    }
    let tol = crate::scalar::resolvable_tol::<S>(1e-8, 64.0);
    for b in [b1, b2] {
        let d = orthonormality_defect(b);
        if !(d <= tol) {
            return Err(Error::NotOrthonormal(d.to_f64_lossy()));
        }
    }
    let m = b1.ncols();
    if m == 0 {
        return Ok(S::zero());
    }
    let diff = projector(b1).sub(&projector(b2))?;
    Ok((diff.frobenius_norm() / S::from_count(2 * m).sqrt()).min(S::one()))
}

/// Worst relative error of a claimed gradient against central differences
/// with step `1e-6`.
///
/// Per coordinate the error is `|fd − g| / max(|g|, 1)`, so near-zero
/// gradients are compared absolutely.
pub fn finite_diff_check<S, F, G>(f: F, g: G, points: &[Vec<S>]) -> S
where
    S: Scalar,
    F: Fn(&[S]) -> S,
    G: Fn(&[S]) -> Vec<S>,
{
    let h = S::c(1e-6);
    let two_h = h + h;
    let mut worst = S::zero();
    for p in points {
        let claimed = g(p);
        let mut probe = p.clone();
        for (i, &gi) in claimed.iter().enumerate() {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            let fd = (up - down) / two_h;
            let err = (fd - gi).abs() / gi.abs().max(S::one());
            worst = worst.max(if err.is_nan() { S::infinity() } else { err });
        }
    }
    worst
}
