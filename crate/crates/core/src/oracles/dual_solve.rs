use serde::{Deserialize, Serialize};

use crate::duality::{DualModel, DualParams};
use crate::dynamics::LOGISTIC_CLAMP;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::oracles::symmetric_eig;
use crate::scalar::Scalar;

/// Consecutive objective decreases tolerated before the step is rejected.
const DIVERGENCE_WINDOW: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualSolveOptions<S> {
    pub max_iters: usize,
    /// Ascent step; `None` picks `1/L` from the curvature of the dual.
    pub step: Option<S>,
    /// Stop once the KKT residual falls below this.
    pub tol: S,
}

impl<S: Scalar> Default for DualSolveOptions<S> {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            step: None,
            tol: S::c(1e-10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolveResult<S> {
    pub z: Vec<S>,
    /// Primal weights `w(ẑ)`.
    pub w: Vec<S>,
    pub objective: S,
    pub iters: usize,
    /// Sup-norm of the projected gradient of `T·D(z)`. For ridge this is
    /// `max_t |z_t − (y_t − wᵀx_t)|`.
    pub kkt_residual: S,
}

/// Projected gradient ascent on the dual of a supervised model.
///
/// Ridge is unconstrained, the SVM dual is projected onto `z ≥ 0` and the
/// logistic dual onto `[ε, 1 − ε]`. The logistic barrier has unbounded
/// curvature near the box faces, so its step is scaled per coordinate by
/// `z_t(1 − z_t)`, which flattens that curvature to one.
pub fn batch_dual_solve<S: Scalar>(
    model: DualModel,
    x: &Matrix<S>,
    y: &[S],
    params: &DualParams<S>,
    opts: &DualSolveOptions<S>,
) -> Result<DualSolveResult<S>> {
    let t_count = x.ncols();
    let t = S::from_count(t_count.max(1));
    let eps = S::c(LOGISTIC_CLAMP).max(S::epsilon());
    let (lo, hi) = match model {
        DualModel::Ridge => (S::neg_infinity(), S::infinity()),
        DualModel::Svm => (S::zero(), S::infinity()),
        DualModel::Logistic => (eps, S::one() - eps),
    };

    let step = match opts.step {
        Some(s) if s > S::zero() => s,
        Some(s) => return Err(Error::param("step", s.to_f64_lossy(), "must be > 0")),
        None => {
            // Curvature of T·D(z): a diagonal part from the per-sample term
            // plus the kernel part λ_max(X Xᵀ)/(λT).
            let top = symmetric_eig(&x.outer_gram())?
                .values
                .first()
                .copied()
                .unwrap_or_else(S::zero);
            let kernel = top / (params.lambda * t);
            let l = match model {
                DualModel::Ridge => S::one() + kernel,
                DualModel::Svm => params.kappa + kernel,
                DualModel::Logistic => S::one() + S::c(0.25) * kernel,
            };
            S::one() / l
        }
    };

    let mut z = vec![
        match model {
            DualModel::Logistic => S::half(),
            _ => S::zero(),
        };
        t_count
    ];

    let mut prev = model.dual_objective(&z, x, y, params)?;
    let mut decreasing = 0;
    let mut iters = 0;
    let mut kkt;
    loop {
        let g: Vec<S> = model
            .dual_gradient(&z, x, y, params)?
            .into_iter()
            .map(|v| v * t)
            .collect();
        kkt = projected_sup_norm(&z, &g, lo, hi);
        if !kkt.is_finite() {
            return Err(Error::NonFinite("dual gradient"));
        }
        if kkt <= opts.tol || iters == opts.max_iters {
            break;
        }
        for (zt, &gt) in z.iter_mut().zip(&g) {
            let scale = match model {
                DualModel::Logistic => *zt * (S::one() - *zt),
                _ => S::one(),
            };
            *zt = (*zt + step * scale * gt).max(lo).min(hi);
        }
        iters += 1;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::StepSize(format!(
                "dual iterates overflowed after {iters} iterations (step {step})"
            )));
        }

        let obj = model.dual_objective(&z, x, y, params)?;
        if obj < prev {
            decreasing += 1;
            if decreasing >= DIVERGENCE_WINDOW {
                return Err(Error::StepSize(format!(
                    "dual objective decreased for {DIVERGENCE_WINDOW} consecutive iterations \
                     (step {step})"
                )));
            }
        } else {
            decreasing = 0;
        }
        prev = obj;
    }

    let w = model.weights(&z, x, y, params.lambda)?;
    Ok(DualSolveResult {
        objective: prev,
        w,
        z,
        iters,
        kkt_residual: kkt,
    })
}

/// `‖P(z + g) − z‖∞` in the limit of small steps: components pushing
/// against an active bound are dropped.
fn projected_sup_norm<S: Scalar>(z: &[S], g: &[S], lo: S, hi: S) -> S {
    z.iter().zip(g).fold(S::zero(), |acc, (&zt, &gt)| {
        let blocked = (zt <= lo && gt < S::zero()) || (zt >= hi && gt > S::zero());
        if blocked {
            acc
        } else {
            acc.max(gt.abs())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit() -> DualParams<f64> {
        DualParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn one_sample_ridge() {
        let x = Matrix::from_columns(&[vec![1.0]]).unwrap();
        let r = batch_dual_solve(DualModel::Ridge, &x, &[1.0], &unit(), &Default::default()).unwrap();
        assert_abs_diff_eq!(r.z[0], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(r.objective, 0.25, epsilon = 1e-12);
        assert!(r.kkt_residual <= 1e-10);
    }

    #[test]
    fn one_sample_svm() {
        let x = Matrix::from_columns(&[vec![1.0]]).unwrap();
        let r = batch_dual_solve(DualModel::Svm, &x, &[1.0], &unit(), &Default::default()).unwrap();
        assert_abs_diff_eq!(r.z[0], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn svm_projection_keeps_duals_nonnegative() {
        // The second point is already far beyond the margin of the first's
        // solution, so its dual is pinned at zero.
        let x = Matrix::from_columns(&[vec![1.0], vec![10.0]]).unwrap();
        let p = DualParams::new(0.05, 1.0).unwrap();
        let r = batch_dual_solve(DualModel::Svm, &x, &[1.0, 1.0], &p, &Default::default()).unwrap();
        assert!(r.z.iter().all(|&z| z >= 0.0));
        assert_eq!(r.z[1], 0.0);
    }

    #[test]
    fn logistic_orthogonal_sample_sits_at_half() {
        let x = Matrix::from_columns(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let r = batch_dual_solve(DualModel::Logistic, &x, &[1.0, -1.0], &unit(), &Default::default())
            .unwrap();
        assert_abs_diff_eq!(r.z[0], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let x = Matrix::from_columns(&[vec![1.0], vec![2.0], vec![-1.0]]).unwrap();
        let opts = DualSolveOptions {
            step: Some(50.0),
            ..Default::default()
        };
        let err = batch_dual_solve(DualModel::Ridge, &x, &[1.0, 0.0, 2.0], &unit(), &opts).unwrap_err();
        assert!(matches!(err, Error::StepSize(_) | Error::NonFinite(_)), "{err:?}");
    }
}
