//! Losses, regularizers, their Fenchel conjugates, and the primal and dual
//! objectives shared by the online learners and the batch oracles.
//!
//! One scaling convention is used everywhere:
//!
//! ```text
//! P(w) = (1/T) Σ_t ℓ(y_t, wᵀx_t) + λ g(w)
//! w(z) = ∇h( (1/(λT)) Σ_t z_t c_t x_t )
//! ```
//!
//! where `c_t = 1` for regression and `c_t = y_t` for the classification
//! duals (the label-modulated inputs `χ_t = y_t x_t`). The square loss is
//! `½(y − u)²`, so the prediction error `y − wᵀx` is the optimal dual
//! variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, check_len, dot, Matrix};
use crate::scalar::Scalar;

/// Pointwise loss `ℓ(y, u)` of a label `y` and a linear prediction `u = wᵀx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossModel<S> {
    /// `½(y − u)²`
    Square,
    /// `max(0, 1 − yu)`; `kappa` is the quadratic coefficient of the
    /// matching dual.
    HingeMargin { kappa: S },
    /// `log(1 + exp(−yu))`
    Logistic,
}

impl<S: Scalar> LossModel<S> {
    pub fn hinge(kappa: S) -> Result<Self> {
        if !(kappa > S::zero()) {
            return Err(Error::param("kappa", kappa.to_f64_lossy(), "must be > 0"));
        }
        Ok(LossModel::HingeMargin { kappa })
    }

    fn name(&self) -> &'static str {
        match self {
            LossModel::Square => "square loss",
            LossModel::HingeMargin { .. } => "hinge loss",
            LossModel::Logistic => "logistic loss",
        }
    }

    fn check_label(&self, y: S) -> Result<()> {
        match self {
            LossModel::Square => Ok(()),
            _ => check_sign_label(self.name(), y),
        }
    }

    pub fn value(&self, y: S, u: S) -> Result<S> {
        self.check_label(y)?;
        Ok(match self {
            LossModel::Square => S::half() * (y - u) * (y - u),
            LossModel::HingeMargin { .. } => (S::one() - y * u).max(S::zero()),
            LossModel::Logistic => softplus(-(y * u)),
        })
    }

    /// Subgradient in the prediction `u`. The hinge takes 0 at the kink.
    pub fn subgradient(&self, y: S, u: S) -> Result<S> {
        self.check_label(y)?;
        Ok(match self {
            LossModel::Square => u - y,
            LossModel::HingeMargin { .. } => {
                if y * u < S::one() {
                    -y
                } else {
                    S::zero()
                }
            }
            LossModel::Logistic => -y * sigmoid(-(y * u)),
        })
    }

    /// Optimal dual variable for a fixed prediction: `ẑ = −ℓ′(y, u)`.
    pub fn dual_optimal_z(&self, y: S, u: S) -> Result<S> {
        Ok(-self.subgradient(y, u)?)
    }
}

pub(crate) fn check_sign_label<S: Scalar>(loss: &'static str, y: S) -> Result<()> {
    if y == S::one() || y == -S::one() {
        Ok(())
    } else {
        Err(Error::InvalidLabel {
            loss,
            label: y.to_f64_lossy(),
        })
    }
}

pub fn loss_value<S: Scalar>(loss: &LossModel<S>, y: S, u: S) -> Result<S> {
    loss.value(y, u)
}

pub fn loss_subgradient<S: Scalar>(loss: &LossModel<S>, y: S, u: S) -> Result<S> {
    loss.subgradient(y, u)
}

pub fn dual_optimal_z<S: Scalar>(loss: &LossModel<S>, y: S, u: S) -> Result<S> {
    loss.dual_optimal_z(y, u)
}

/// `log(1 + exp(t))` without overflow.
#[inline]
pub fn softplus<S: Scalar>(t: S) -> S {
    if t > S::zero() {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Logistic sigmoid `1 / (1 + exp(−t))`, evaluated on the branch that
/// cannot overflow.
#[inline]
pub fn sigmoid<S: Scalar>(t: S) -> S {
    if t >= S::zero() {
        S::one() / (S::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (S::one() + e)
    }
}

/// Conjugate of the square loss in its second argument:
/// `sup_u (uv − ½(y − u)²) = yv + v²/2`.
pub fn square_conjugate<S: Scalar>(y: S, v: S) -> S {
    y * v + S::half() * v * v
}

/// Value and derivative of the binary entropy barrier
/// `F(z) = −z log z − (1 − z) log(1 − z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier<S> {
    pub value: S,
    /// `F′(z) = log((1 − z)/z)`; `+∞` at `z = 0`, `−∞` at `z = 1`.
    pub derivative: S,
}

pub fn entropy_barrier<S: Scalar>(z: S) -> Result<Barrier<S>> {
    if !(z >= S::zero() && z <= S::one()) {
        return Err(Error::Domain {
            what: "entropy barrier",
            value: z.to_f64_lossy(),
            domain: "[0, 1]",
        });
    }
    if z == S::zero() {
        return Ok(Barrier {
            value: S::zero(),
            derivative: S::infinity(),
        });
    }
    if z == S::one() {
        return Ok(Barrier {
            value: S::zero(),
            derivative: S::neg_infinity(),
        });
    }
    let zc = S::one() - z;
    Ok(Barrier {
        value: -(z * z.ln()) - zc * zc.ln(),
        derivative: (zc / z).ln(),
    })
}

/// Convex regularizer `g` scaled by `lambda` in the primal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegularizerModel<S> {
    /// `g(w) = ½‖w‖²`
    L2 { lambda: S },
    /// `g(w) = Σ w_k ln(w_k / μ_k)` on the positive orthant.
    UnnormalizedEntropy { lambda: S, mu: Vec<S> },
}

impl<S: Scalar> RegularizerModel<S> {
    pub fn l2(lambda: S) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(RegularizerModel::L2 { lambda })
    }

    pub fn entropy(lambda: S, mu: Vec<S>) -> Result<Self> {
        check_lambda(lambda)?;
        if let Some(bad) = mu.iter().find(|m| !(**m > S::zero())) {
            return Err(Error::param("mu", bad.to_f64_lossy(), "every component must be > 0"));
        }
        Ok(RegularizerModel::UnnormalizedEntropy { lambda, mu })
    }

    pub fn lambda(&self) -> S {
        match self {
            RegularizerModel::L2 { lambda } | RegularizerModel::UnnormalizedEntropy { lambda, .. } => {
                *lambda
            }
        }
    }

    /// `g(w)` (without the `lambda` factor). Entropy uses `0 ln 0 = 0`.
    pub fn value(&self, w: &[S]) -> Result<S> {
        match self {
            RegularizerModel::L2 { .. } => Ok(S::half() * dot(w, w)),
            RegularizerModel::UnnormalizedEntropy { mu, .. } => {
                check_len("entropy regularizer weights", mu.len(), w.len())?;
                let mut acc = S::zero();
                for (&wk, &mk) in w.iter().zip(mu) {
                    if wk < S::zero() || wk.is_nan() {
                        return Err(Error::Domain {
                            what: "entropy regularizer weight",
                            value: wk.to_f64_lossy(),
                            domain: "w_k >= 0",
                        });
                    }
                    if wk > S::zero() {
                        acc = acc + wk * (wk / mk).ln();
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Gradient of the conjugate `h(v) = sup_u (uᵀv − g(u))`.
    pub fn conjugate_gradient(&self, v: &[S]) -> Result<Vec<S>> {
        match self {
            RegularizerModel::L2 { .. } => Ok(v.to_vec()),
            RegularizerModel::UnnormalizedEntropy { mu, .. } => {
                check_len("entropy conjugate argument", mu.len(), v.len())?;
                Ok(v.iter()
                    .zip(mu)
                    .map(|(&vk, &mk)| mk * (vk - S::one()).exp())
                    .collect())
            }
        }
    }

    /// Primal weights recovered from dual variables:
    /// `w = ∇h((1/(λT)) X z)`.
    pub fn weights_from_duals(&self, z: &[S], x: &Matrix<S>) -> Result<Vec<S>> {
        check_len("dual vector (one entry per sample)", x.ncols(), z.len())?;
        let scale = S::one() / (self.lambda() * S::from_count(x.ncols().max(1)));
        let v: Vec<S> = x.matvec(z)?.into_iter().map(|e| e * scale).collect();
        self.conjugate_gradient(&v)
    }
}

fn check_lambda<S: Scalar>(lambda: S) -> Result<()> {
    if lambda > S::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::param("lambda", lambda.to_f64_lossy(), "must be > 0"))
    }
}

pub fn reg_conjugate_gradient<S: Scalar>(reg: &RegularizerModel<S>, v: &[S]) -> Result<Vec<S>> {
    reg.conjugate_gradient(v)
}

pub fn weights_from_duals<S: Scalar>(
    reg: &RegularizerModel<S>,
    z: &[S],
    x: &Matrix<S>,
) -> Result<Vec<S>> {
    reg.weights_from_duals(z, x)
}

/// Checks that `X` has `n` rows and, when given, `y` has one label per column.
pub(crate) fn check_data<S: Scalar>(w_len: usize, x: &Matrix<S>, y: Option<&[S]>) -> Result<()> {
    check_len("weights vs feature dimension", x.nrows(), w_len)?;
    if let Some(y) = y {
        check_len("labels (one per sample)", x.ncols(), y.len())?;
    }
    Ok(())
}

/// `(1/T) Σ_t ℓ(y_t, wᵀx_t) + λ g(w)`.
pub fn primal_objective<S: Scalar>(
    loss: &LossModel<S>,
    reg: &RegularizerModel<S>,
    w: &[S],
    x: &Matrix<S>,
    y: &[S],
) -> Result<S> {
    check_data(w.len(), x, Some(y))?;
    let t = x.ncols();
    let mut total = S::zero();
    for (xt, &yt) in x.columns().zip(y) {
        total = total + loss.value(yt, dot(w, xt))?;
    }
    let data_term = if t == 0 {
        S::zero()
    } else {
        total / S::from_count(t)
    };
    Ok(data_term + reg.lambda() * reg.value(w)?)
}

/// Supervised model whose dual is written in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualModel {
    Ridge,
    Svm,
    Logistic,
}

/// Hyperparameters entering the dual: `lambda` (L2 strength) and `kappa`
/// (SVM dual quadratic coefficient; ignored otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualParams<S> {
    pub lambda: S,
    pub kappa: S,
}

impl<S: Scalar> DualParams<S> {
    pub fn new(lambda: S, kappa: S) -> Result<Self> {
        check_lambda(lambda)?;
        if !(kappa > S::zero()) {
            return Err(Error::param("kappa", kappa.to_f64_lossy(), "must be > 0"));
        }
        Ok(Self { lambda, kappa })
    }
}

impl DualModel {
    /// Whether the data term pairs `z_t` with `y_t x_t` instead of `x_t`.
    fn label_modulated(self) -> bool {
        !matches!(self, DualModel::Ridge)
    }

    fn constraint(self) -> &'static str {
        match self {
            DualModel::Ridge => "unconstrained",
            DualModel::Svm => "z >= 0",
            DualModel::Logistic => "0 <= z <= 1",
        }
    }

    pub fn check_feasible<S: Scalar>(self, z: &[S]) -> Result<()> {
        let ok = |v: S| match self {
            DualModel::Ridge => v.is_finite(),
            DualModel::Svm => v >= S::zero() && v.is_finite(),
            DualModel::Logistic => v >= S::zero() && v <= S::one(),
        };
        match z.iter().position(|&v| !ok(v)) {
            None => Ok(()),
            Some(index) => Err(Error::Infeasible {
                index,
                value: z[index].to_f64_lossy(),
                constraint: self.constraint(),
            }),
        }
    }

    fn check_labels<S: Scalar>(self, y: &[S]) -> Result<()> {
        if self.label_modulated() {
            for &yt in y {
                check_sign_label(
                    match self {
                        DualModel::Svm => "SVM dual",
                        _ => "logistic dual",
                    },
                    yt,
                )?;
            }
        }
        Ok(())
    }

    /// Primal weights `w(z) = (1/(λT)) Σ_t z_t c_t x_t`.
    pub fn weights<S: Scalar>(self, z: &[S], x: &Matrix<S>, y: &[S], lambda: S) -> Result<Vec<S>> {
        check_len("dual vector (one entry per sample)", x.ncols(), z.len())?;
        check_len("labels (one per sample)", x.ncols(), y.len())?;
        let mut w = vec![S::zero(); x.nrows()];
        for ((xt, &zt), &yt) in x.columns().zip(z).zip(y) {
            let c = if self.label_modulated() { zt * yt } else { zt };
            axpy(c, xt, &mut w);
        }
        let scale = S::one() / (lambda * S::from_count(x.ncols().max(1)));
        w.iter_mut().for_each(|v| *v = *v * scale);
        Ok(w)
    }

    /// Optimal dual variable of one sample for the current prediction
    /// `u = wᵀx`: the prediction error, the rectified margin violation, or
    /// the logistic responsibility.
    pub fn activity<S: Scalar>(self, y: S, u: S, kappa: S) -> S {
        match self {
            DualModel::Ridge => y - u,
            DualModel::Svm => (S::one() - y * u).max(S::zero()) / kappa,
            DualModel::Logistic => sigmoid(-(y * u)),
        }
    }

    /// Per-sample concave term of the dual and its derivative.
    fn sample_term<S: Scalar>(self, z: S, y: S, kappa: S) -> Result<(S, S)> {
        Ok(match self {
            DualModel::Ridge => (z * y - S::half() * z * z, y - z),
            DualModel::Svm => (z - S::half() * kappa * z * z, S::one() - kappa * z),
            DualModel::Logistic => {
                let b = entropy_barrier(z)?;
                (b.value, b.derivative)
            }
        })
    }

    /// Dual objective
    ///
    /// ```text
    /// D(z) = (1/T) Σ_t a(z_t) − (1/(2λT²)) ‖Σ_t z_t c_t x_t‖²
    /// ```
    ///
    /// with `a(z) = zy − z²/2` (ridge), `z − κz²/2` (SVM) or the entropy
    /// barrier `F(z)` (logistic). At `λT = 1` this is `1/T` times the
    /// unscaled kernel form `Σ a(z_t) − ½ Σ z_t z_t' c_t c_t' x_tᵀx_t'`.
    pub fn dual_objective<S: Scalar>(
        self,
        z: &[S],
        x: &Matrix<S>,
        y: &[S],
        params: &DualParams<S>,
    ) -> Result<S> {
        self.check_feasible(z)?;
        self.check_labels(y)?;
        let w = self.weights(z, x, y, params.lambda)?;
        let t = S::from_count(x.ncols().max(1));
        let mut sum = S::zero();
        for (&zt, &yt) in z.iter().zip(y) {
            sum = sum + self.sample_term(zt, yt, params.kappa)?.0;
        }
        Ok(sum / t - S::half() * params.lambda * dot(&w, &w))
    }

    /// Gradient of [`DualModel::dual_objective`]:
    /// `∂D/∂z_t = a′(z_t)/T − c_t w(z)ᵀx_t / T`.
    pub fn dual_gradient<S: Scalar>(
        self,
        z: &[S],
        x: &Matrix<S>,
        y: &[S],
        params: &DualParams<S>,
    ) -> Result<Vec<S>> {
        self.check_feasible(z)?;
        self.check_labels(y)?;
        let w = self.weights(z, x, y, params.lambda)?;
        let t = S::from_count(x.ncols().max(1));
        x.columns()
            .zip(z)
            .zip(y)
            .map(|((xt, &zt), &yt)| {
                let (_, da) = self.sample_term(zt, yt, params.kappa)?;
                let c = if self.label_modulated() { yt } else { S::one() };
                Ok((da - c * dot(&w, xt)) / t)
            })
            .collect()
    }

    /// Primal objective whose Fenchel dual is exactly
    /// [`DualModel::dual_objective`]. For the SVM dual this is the squared
    /// hinge `[1 − yu]₊² / (2κ)`, which tends to the hard margin as κ → 0.
    pub fn matched_primal<S: Scalar>(
        self,
        w: &[S],
        x: &Matrix<S>,
        y: &[S],
        params: &DualParams<S>,
    ) -> Result<S> {
        check_data(w.len(), x, Some(y))?;
        self.check_labels(y)?;
        let mut total = S::zero();
        for (xt, &yt) in x.columns().zip(y) {
            let u = dot(w, xt);
            total = total
                + match self {
                    DualModel::Ridge => S::half() * (yt - u) * (yt - u),
                    DualModel::Svm => {
                        let v = (S::one() - yt * u).max(S::zero());
                        v * v / (S::c(2.0) * params.kappa)
                    }
                    DualModel::Logistic => softplus(-(yt * u)),
                };
        }
        let t = S::from_count(x.ncols().max(1));
        Ok(total / t + params.lambda * S::half() * dot(w, w))
    }
}

pub fn dual_objective<S: Scalar>(
    model: DualModel,
    z: &[S],
    x: &Matrix<S>,
    y: &[S],
    params: &DualParams<S>,
) -> Result<S> {
    model.dual_objective(z, x, y, params)
}

/// A primal weight vector paired with per-sample dual variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualPoint<S> {
    pub w: Vec<S>,
    pub z: Vec<S>,
}

impl<S: Scalar> PrimalDualPoint<S> {
    /// Duals at their per-sample optimum for the given weights.
    pub fn from_weights(
        model: DualModel,
        w: Vec<S>,
        x: &Matrix<S>,
        y: &[S],
        kappa: S,
    ) -> Result<Self> {
        check_data(w.len(), x, Some(y))?;
        let z = x
            .columns()
            .zip(y)
            .map(|(xt, &yt)| model.activity(yt, dot(&w, xt), kappa))
            .collect();
        Ok(Self { w, z })
    }

    pub fn check_dims(&self, x: &Matrix<S>) -> Result<()> {
        check_len("weights vs feature dimension", x.nrows(), self.w.len())?;
        check_len("duals vs sample count", x.ncols(), self.z.len())
    }
}
