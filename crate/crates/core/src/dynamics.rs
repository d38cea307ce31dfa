//! Neural dynamics: explicit-Euler relaxation of `dz/dγ = Γ(z)` to its
//! fixed point, and the vector fields of each learner.

use serde::{Deserialize, Serialize};

use crate::duality::{check_sign_label, entropy_barrier};
use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, norm_inf, Matrix};
use crate::oracles::symmetric_eig;
use crate::scalar::{resolvable_tol, Scalar};

/// Iterates of the logistic activity are kept inside `[ε, 1 − ε]`.
pub const LOGISTIC_CLAMP: f64 = 1e-12;

/// Smallest eigenvalue the lateral matrix may have.
pub const PD_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig<S> {
    /// Euler step in auxiliary time γ.
    pub step: S,
    /// Stop once `‖Γ(z)‖∞ ≤ tol`.
    pub tol: S,
    pub max_iters: usize,
}

impl<S: Scalar> Default for DynamicsConfig<S> {
    /// Step 0.1, 10000 iterations, tolerance 1e-8 (raised to what single
    /// precision can resolve).
    fn default() -> Self {
        Self {
            step: S::c(0.1),
            tol: resolvable_tol(1e-8, 64.0),
            max_iters: 10_000,
        }
    }
}

impl<S: Scalar> DynamicsConfig<S> {
    pub fn new(step: S, tol: S, max_iters: usize) -> Result<Self> {
        let cfg = Self {
            step,
            tol,
            max_iters,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > S::zero()) {
            return Err(Error::param("step", self.step.to_f64_lossy(), "must be > 0"));
        }
        if !(self.tol > S::zero()) {
            return Err(Error::param("tol", self.tol.to_f64_lossy(), "must be > 0"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", 0.0, "must be >= 1"));
        }
        Ok(())
    }
}

/// Exit state of a relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint<S> {
    pub z: Vec<S>,
    /// Number of Euler updates performed.
    pub iters: usize,
    /// `‖Γ(z)‖∞` at exit.
    pub residual: S,
}

impl<S: Scalar> FixedPoint<S> {
    /// The activity of a single-neuron relaxation.
    pub fn scalar(&self) -> S {
        self.z[0]
    }
}

/// Relaxes `z ← z + step·Γ(z)` until `‖Γ(z)‖∞ ≤ tol`.
///
/// `field` writes `Γ(z)` into its second argument.
pub fn relax<S, F>(field: F, z0: Vec<S>, cfg: &DynamicsConfig<S>) -> Result<FixedPoint<S>>
where
    S: Scalar,
    F: FnMut(&[S], &mut [S]),
{
    relax_projected(field, |_| {}, z0, cfg)
}

/// [`relax`] with a projection applied after every Euler update.
pub fn relax_projected<S, F, P>(
    mut field: F,
    mut project: P,
    z0: Vec<S>,
    cfg: &DynamicsConfig<S>,
) -> Result<FixedPoint<S>>
where
    S: Scalar,
    F: FnMut(&[S], &mut [S]),
    P: FnMut(&mut [S]),
{
    cfg.validate()?;
    let mut z = z0;
    let mut g = vec![S::zero(); z.len()];
    let mut iters = 0;
    loop {
        field(&z, &mut g);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("neural dynamics field"));
        }
        let residual = norm_inf(&g);
        if residual <= cfg.tol {
            return Ok(FixedPoint { z, iters, residual });
        }
        if iters == cfg.max_iters {
            return Err(Error::NotConverged {
                iters,
                residual: residual.to_f64_lossy(),
            });
        }
        for (zi, &gi) in z.iter_mut().zip(&g) {
            *zi = *zi + cfg.step * gi;
        }
        project(&mut z);
        iters += 1;
    }
}

/// Scalar convenience wrapper around [`relax`].
pub fn relax_scalar<S, F>(mut field: F, z0: S, cfg: &DynamicsConfig<S>) -> Result<FixedPoint<S>>
where
    S: Scalar,
    F: FnMut(S) -> S,
{
    relax(|z, g| g[0] = field(z[0]), vec![z0], cfg)
}

fn prediction<S: Scalar>(w: &[S], x: &[S]) -> Result<S> {
    check_len("weights vs input dimension", w.len(), x.len())?;
    Ok(dot(w, x))
}

/// Ridge / exponentiated-gradient error neuron: `Γ = (y − wᵀx) − z`.
pub fn ridge_field<S: Scalar>(w: &[S], x: &[S], y: S, z: S) -> Result<S> {
    Ok(y - prediction(w, x)? - z)
}

/// Logistic neuron field `Γ = y wᵀx − F′(z)` as written for the dual.
///
/// This field is repelling around its fixed point `z = σ(−y wᵀx)`; the
/// relaxation in [`logistic_activity`] follows the ascent direction of the
/// dual instead.
pub fn logistic_field<S: Scalar>(w: &[S], x: &[S], y: S, z: S) -> Result<S> {
    check_sign_label("logistic dynamics", y)?;
    if !(z > S::zero() && z < S::one()) {
        return Err(Error::Domain {
            what: "logistic activity",
            value: z.to_f64_lossy(),
            domain: "(0, 1)",
        });
    }
    Ok(y * prediction(w, x)? - entropy_barrier(z)?.derivative)
}

/// Ascent field of the logistic dual in one coordinate, preconditioned by
/// `z(1 − z)`: `Γ = z(1 − z)(F′(z) − y wᵀx)`.
///
/// Same fixed point as [`logistic_field`]; its linearization there is
/// `−1`, so an Euler step below 2 is stable for any margin.
pub fn logistic_ascent_field<S: Scalar>(margin: S, z: S) -> S {
    let zc = S::one() - z;
    z * zc * ((zc / z).ln() - margin)
}

/// Rectified SVM activity `[1 − y wᵀx]₊ / κ` in closed form.
pub fn svm_activation<S: Scalar>(w: &[S], x: &[S], y: S, kappa: S) -> Result<S> {
    check_kappa(kappa)?;
    check_sign_label("SVM dynamics", y)?;
    let m = y * prediction(w, x)?;
    Ok((S::one() - m).max(S::zero()) / kappa)
}

fn check_kappa<S: Scalar>(kappa: S) -> Result<()> {
    if kappa > S::zero() {
        Ok(())
    } else {
        Err(Error::param("kappa", kappa.to_f64_lossy(), "must be > 0"))
    }
}

/// SVM activity by relaxing `Γ = (1 − y wᵀx)/κ − z` with `z ← max(z, 0)`.
pub fn svm_activation_relaxed<S: Scalar>(
    w: &[S],
    x: &[S],
    y: S,
    kappa: S,
    cfg: &DynamicsConfig<S>,
) -> Result<FixedPoint<S>> {
    check_kappa(kappa)?;
    check_sign_label("SVM dynamics", y)?;
    let drive = (S::one() - y * prediction(w, x)?) / kappa;
    relax_projected(
        // Projected field: zero when pinned at the bound by a negative drive.
        |z, g| {
            let v = drive - z[0];
            g[0] = if z[0] <= S::zero() && v < S::zero() {
                S::zero()
            } else {
                v
            };
        },
        |z| z[0] = z[0].max(S::zero()),
        vec![S::zero()],
        cfg,
    )
}

/// Fixed point of [`ridge_field`], started from `z = 0`.
pub fn ridge_activity<S: Scalar>(
    w: &[S],
    x: &[S],
    y: S,
    cfg: &DynamicsConfig<S>,
) -> Result<FixedPoint<S>> {
    let target = y - prediction(w, x)?;
    relax_scalar(|z| target - z, S::zero(), cfg)
}

/// Logistic activity `σ(−y wᵀx)` reached by relaxing
/// [`logistic_ascent_field`] from `z = ½`, clamped to `[ε, 1 − ε]`.
pub fn logistic_activity<S: Scalar>(
    w: &[S],
    x: &[S],
    y: S,
    cfg: &DynamicsConfig<S>,
) -> Result<FixedPoint<S>> {
    check_sign_label("logistic dynamics", y)?;
    let margin = y * prediction(w, x)?;
    let eps = S::c(LOGISTIC_CLAMP).max(S::epsilon());
    let hi = S::one() - eps;
    relax_projected(
        |z, g| g[0] = logistic_ascent_field(margin, z[0]),
        |z| z[0] = z[0].max(eps).min(hi),
        vec![S::half()],
        cfg,
    )
}

/// Similarity-matching field `Γ = W x − M z`.
pub fn sm_field<S: Scalar>(w: &Matrix<S>, m: &Matrix<S>, x: &[S], z: &[S]) -> Result<Vec<S>> {
    check_sm_dims(w, m, x)?;
    check_len("output activity", m.nrows(), z.len())?;
    check_lateral(m)?;
    let wx = w.matvec(x)?;
    let mz = m.matvec(z)?;
    Ok(wx.iter().zip(&mz).map(|(&a, &b)| a - b).collect())
}

fn check_sm_dims<S: Scalar>(w: &Matrix<S>, m: &Matrix<S>, x: &[S]) -> Result<()> {
    check_len("input vs feedforward columns", w.ncols(), x.len())?;
    check_len("lateral matrix rows", w.nrows(), m.nrows())?;
    check_len("lateral matrix columns", w.nrows(), m.ncols())
}

/// Fails unless `m` is symmetric with smallest eigenvalue at least
/// [`PD_THRESHOLD`]. Returns that eigenvalue.
pub fn check_lateral<S: Scalar>(m: &Matrix<S>) -> Result<S> {
    let eig = symmetric_eig(m)?;
    let min = eig.values.last().copied().unwrap_or_else(S::one);
    if min >= S::c(PD_THRESHOLD) {
        Ok(min)
    } else {
        Err(Error::Unstable {
            min_eigenvalue: min.to_f64_lossy(),
        })
    }
}

/// Output activity `z` with `M z = W x`, reached by relaxing [`sm_field`]
/// from zero.
pub fn sm_activity<S: Scalar>(
    w: &Matrix<S>,
    m: &Matrix<S>,
    x: &[S],
    cfg: &DynamicsConfig<S>,
) -> Result<FixedPoint<S>> {
    check_sm_dims(w, m, x)?;
    check_lateral(m)?;
    let wx = w.matvec(x)?;
    let k = m.nrows();
    relax(
        |z, g| {
            g.copy_from_slice(&wx);
            for (j, &zj) in z.iter().enumerate() {
                for (gi, &mij) in g.iter_mut().zip(m.col(j)) {
                    *gi = *gi - mij * zj;
                }
            }
        },
        vec![S::zero(); k],
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::sigmoid;
    use crate::linalg::solve;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cfg(step: f64, tol: f64) -> DynamicsConfig<f64> {
        DynamicsConfig::new(step, tol, 100_000).unwrap()
    }

    #[test]
    fn relaxes_affine_fields() {
        let fp = relax_scalar(|z| 3.0 - z, 0.0, &cfg(0.5, 1e-10)).unwrap();
        assert_abs_diff_eq!(fp.scalar(), 3.0, epsilon = 1e-9);
        assert!(fp.residual <= 1e-10);
        let fp = relax_scalar(|z| -z, 5.0, &DynamicsConfig::default()).unwrap();
        assert_abs_diff_eq!(fp.scalar(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn relax_reports_non_convergence_and_non_finite() {
        let err = relax_scalar(|z| 1.0 + 0.0 * z, 0.0, &DynamicsConfig::new(0.1, 1e-8, 5).unwrap())
            .unwrap_err();
        assert_eq!(
            err,
            Error::NotConverged {
                iters: 5,
                residual: 1.0
            }
        );
        let err = relax_scalar(|_| f64::NAN, 0.0, &DynamicsConfig::default()).unwrap_err();
        assert_eq!(err, Error::NonFinite("neural dynamics field"));
        assert!(DynamicsConfig::new(0.0, 1e-8, 10).is_err());
        assert!(DynamicsConfig::new(0.1, 1e-8, 0).is_err());
    }

    #[test]
    fn ridge_field_examples() {
        assert_eq!(ridge_field(&[0.0], &[3.0], 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(ridge_field(&[1.0], &[1.0], 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(ridge_field(&[2.0], &[0.5], 3.0, 0.5).unwrap(), 1.5);
        assert!(ridge_field(&[1.0, 2.0], &[1.0], 1.0, 0.0).is_err());
        let fp = ridge_activity(&[0.0, 0.0], &[0.3, -7.0], 2.0, &DynamicsConfig::default()).unwrap();
        assert_abs_diff_eq!(fp.scalar(), 2.0, epsilon = 1e-7);
    }

    #[test]
    fn logistic_field_examples() {
        assert_eq!(logistic_field(&[0.0], &[1.0], 1.0, 0.5).unwrap(), 0.0);
        let ln3 = 3f64.ln();
        assert_abs_diff_eq!(logistic_field(&[ln3], &[1.0], 1.0, 0.25).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(logistic_field(&[0.0], &[1.0], 1.0, 0.25).unwrap(), -ln3, epsilon = 1e-15);
        assert!(matches!(
            logistic_field(&[0.0], &[1.0], 1.0, 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(logistic_field(&[0.0], &[1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn literal_logistic_field_is_repelling() {
        // Slightly above the fixed point z* = 0.5 the literal field pushes up.
        assert!(logistic_field(&[0.0], &[1.0], 1.0, 0.5 + 1e-3).unwrap() > 0.0);
        assert!(logistic_ascent_field(0.0, 0.5 + 1e-3) < 0.0);
    }

    #[test]
    fn logistic_relaxation_handles_large_margins() {
        let c = DynamicsConfig::default();
        for m in [-20.0, -10.0, -3.0, 0.0, 0.7, 10.0, 20.0] {
            let fp = logistic_activity(&[m], &[1.0], 1.0, &c).unwrap();
            assert_abs_diff_eq!(fp.scalar(), sigmoid(-m), epsilon = 1e-8);
        }
    }

    #[test]
    fn svm_activation_examples() {
        assert_eq!(svm_activation(&[2.0], &[1.0], 1.0, 0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(svm_activation(&[0.3], &[1.0], 1.0, 1.0).unwrap(), 0.7, epsilon = 1e-15);
        assert_eq!(svm_activation(&[0.0], &[1.0], -1.0, 2.0).unwrap(), 0.5);
        assert!(svm_activation(&[0.0], &[1.0], 1.0, 0.0).is_err());
        assert!(svm_activation(&[0.0], &[1.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn svm_relaxation_matches_closed_form() {
        let c = cfg(0.1, 1e-12);
        for (w, y) in [(0.3, 1.0), (2.0, 1.0), (0.5, -1.0), (-4.0, -1.0)] {
            let exact = svm_activation(&[w], &[1.0], y, 0.8).unwrap();
            let fp = svm_activation_relaxed(&[w], &[1.0], y, 0.8, &c).unwrap();
            assert_abs_diff_eq!(fp.scalar(), exact, epsilon = 1e-10);
        }
    }

    #[test]
    fn sm_field_examples() {
        let i2 = Matrix::<f64>::identity(2);
        assert_eq!(sm_field(&i2, &i2, &[1.0, 2.0], &[0.0, 0.0]).unwrap(), vec![1.0, 2.0]);
        let m2 = i2.scaled(2.0);
        let fp = sm_activity(&i2, &m2, &[1.0, 0.0], &DynamicsConfig::default()).unwrap();
        assert_abs_diff_eq!(fp.z[0], 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(fp.z[1], 0.0, epsilon = 1e-8);
        let z = solve(&m2, &[3.0, -1.0]).unwrap();
        assert_eq!(sm_field(&i2, &m2, &[3.0, -1.0], &z).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn sm_field_rejects_indefinite_lateral() {
        let w = Matrix::<f64>::identity(2);
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            sm_field(&w, &m, &[1.0, 0.0], &[0.0, 0.0]),
            Err(Error::Unstable { .. })
        ));
    }

    proptest! {
        #[test]
        fn affine_contraction_converges(a in -50.0f64..50.0, z0 in -50.0f64..50.0, step in 0.05f64..1.9) {
            let fp = relax_scalar(|z| a - z, z0, &cfg(step, 1e-10)).unwrap();
            prop_assert!((fp.scalar() - a).abs() <= 1e-9);
        }

        #[test]
        fn svm_activation_is_rectified(w in -3.0f64..3.0, x in -3.0f64..3.0, pos in any::<bool>(), kappa in 0.1f64..5.0) {
            let y = if pos { 1.0 } else { -1.0 };
            let z = svm_activation(&[w], &[x], y, kappa).unwrap();
            prop_assert!(z >= 0.0);
            prop_assert_eq!(z == 0.0, y * w * x >= 1.0);
        }
    }
}
