use crate::error::{Error, Result};
use crate::linalg::{solve, Matrix};
use crate::scalar::Scalar;

/// Minimizer of `(1/T) Σ ½(y_t − wᵀx_t)² + (λ/2)‖w‖²`, from the normal
/// equations `((1/T) X Xᵀ + λI) w = (1/T) X y`.
pub fn ridge_closed_form<S: Scalar>(x: &Matrix<S>, y: &[S], lambda: S) -> Result<Vec<S>> {
    if !(lambda > S::zero()) {
        return Err(Error::param("lambda", lambda.to_f64_lossy(), "must be > 0"));
    }
    let t = S::from_count(x.ncols().max(1));
    let mut a = x.outer_gram().scaled(S::one() / t);
    for i in 0..a.nrows() {
        a[(i, i)] = a[(i, i)] + lambda;
    }
    let b: Vec<S> = x.matvec(y)?.into_iter().map(|v| v / t).collect();
    solve(&a, &b)
}
