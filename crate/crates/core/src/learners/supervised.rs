use serde::{Deserialize, Serialize};

use crate::duality::{check_sign_label, DualModel};
use crate::dynamics::{logistic_activity, ridge_activity, svm_activation, DynamicsConfig};
use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, norm2};
use crate::scalar::Scalar;

/// Largest exponent `|η z x_k|` a multiplicative step may apply.
pub const EXPGRAD_MAX_EXPONENT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupervisedModel {
    /// Error neuron, additive Hebbian rule.
    Ridge,
    /// Rectified margin neuron, label-modulated Hebbian rule.
    Svm,
    /// Sigmoidal neuron, label-modulated Hebbian rule.
    Logistic,
    /// Error neuron, multiplicative Hebbian rule.
    ExpGrad,
}

impl SupervisedModel {
    pub fn requires_sign_labels(self) -> bool {
        matches!(self, SupervisedModel::Svm | SupervisedModel::Logistic)
    }

    /// The dual whose per-sample optimum the neuron computes.
    pub fn dual_model(self) -> Option<DualModel> {
        match self {
            SupervisedModel::Ridge => Some(DualModel::Ridge),
            SupervisedModel::Svm => Some(DualModel::Svm),
            SupervisedModel::Logistic => Some(DualModel::Logistic),
            SupervisedModel::ExpGrad => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedHyper<S> {
    /// Learning rate η.
    pub eta: S,
    /// SVM dual coefficient κ.
    pub kappa: S,
    /// Weight decay added to the ridge rule: `Δw = η(z x − λ_eff w)`.
    /// Zero gives the plain Hebbian rule.
    pub lambda_eff: S,
    /// Entropy prior μ for the multiplicative rule (and its starting point).
    pub mu: Option<Vec<S>>,
    /// Rescale multiplicative weights to sum to one after each step.
    pub normalize: bool,
}

impl<S: Scalar> SupervisedHyper<S> {
    pub fn new(eta: S) -> Self {
        Self {
            eta,
            kappa: S::one(),
            lambda_eff: S::zero(),
            mu: None,
            normalize: false,
        }
    }

    fn validate(&self, model: SupervisedModel, n: usize) -> Result<()> {
        if !(self.eta > S::zero() && self.eta.is_finite()) {
            return Err(Error::param("eta", self.eta.to_f64_lossy(), "must be > 0"));
        }
        if !(self.kappa > S::zero()) {
            return Err(Error::param("kappa", self.kappa.to_f64_lossy(), "must be > 0"));
        }
        if !(self.lambda_eff >= S::zero()) {
            return Err(Error::param(
                "lambda_eff",
                self.lambda_eff.to_f64_lossy(),
                "must be >= 0",
            ));
        }
        if let Some(mu) = &self.mu {
            check_len("entropy prior mu", n, mu.len())?;
            if let Some(bad) = mu.iter().find(|v| !(**v > S::zero())) {
                return Err(Error::param("mu", bad.to_f64_lossy(), "every component must be > 0"));
            }
        } else if model == SupervisedModel::ExpGrad && n == 0 {
            return Err(Error::param("n", 0.0, "must be >= 1"));
        }
        Ok(())
    }
}

/// Result of one online step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome<S> {
    /// Post-synaptic activity: one entry for supervised neurons, `m` for
    /// similarity matching.
    pub z: Vec<S>,
    /// `‖Δw‖`, or `‖ΔW‖_F + ‖ΔM‖_F`.
    pub update_norm: S,
    pub dynamics_iters: usize,
}

/// Single-neuron online learner: neural dynamics produce the activity `z`,
/// then a local rule updates the synapses `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedLearner<S> {
    pub model: SupervisedModel,
    pub w: Vec<S>,
    pub hyper: SupervisedHyper<S>,
    pub dynamics: DynamicsConfig<S>,
}

impl<S: Scalar> SupervisedLearner<S> {
    /// Weights start at zero, except the multiplicative learner, which
    /// starts at its prior μ (all ones when unset).
    pub fn new(model: SupervisedModel, n: usize, mut hyper: SupervisedHyper<S>) -> Result<Self> {
        hyper.validate(model, n)?;
        let w = match model {
            SupervisedModel::ExpGrad => {
                let mu = hyper.mu.get_or_insert_with(|| vec![S::one(); n]).clone();
                mu
            }
            _ => vec![S::zero(); n],
        };
        Ok(Self {
            model,
            w,
            hyper,
            dynamics: DynamicsConfig::default(),
        })
    }

    pub fn with_dynamics(mut self, dynamics: DynamicsConfig<S>) -> Result<Self> {
        dynamics.validate()?;
        self.dynamics = dynamics;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn predict(&self, x: &[S]) -> Result<S> {
        check_len("input vs weights", self.w.len(), x.len())?;
        Ok(dot(&self.w, x))
    }

    fn check_label(&self, y: S) -> Result<()> {
        if self.model.requires_sign_labels() {
            check_sign_label(
                match self.model {
                    SupervisedModel::Svm => "SVM learner",
                    _ => "logistic learner",
                },
                y,
            )
        } else if y.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("regression target"))
        }
    }

    /// Activity of the output neuron for `(x, y)` at the current weights,
    /// with the number of relaxation iterations it took.
    pub fn activity(&self, x: &[S], y: S) -> Result<(S, usize)> {
        self.check_label(y)?;
        check_len("input vs weights", self.w.len(), x.len())?;
        Ok(match self.model {
            SupervisedModel::Ridge | SupervisedModel::ExpGrad => {
                let fp = ridge_activity(&self.w, x, y, &self.dynamics)?;
                (fp.scalar(), fp.iters)
            }
            SupervisedModel::Svm => (svm_activation(&self.w, x, y, self.hyper.kappa)?, 0),
            SupervisedModel::Logistic => {
                let fp = logistic_activity(&self.w, x, y, &self.dynamics)?;
                (fp.scalar(), fp.iters)
            }
        })
    }

    /// New weights after the plasticity rule for a given activity `z`.
    ///
    /// Every component `w′_i` depends only on `w_i`, `x_i`, `z` and `y`.
    pub fn plasticity(&self, z: S, x: &[S], y: S, eta: S) -> Result<Vec<S>> {
        check_len("input vs weights", self.w.len(), x.len())?;
        let w = &self.w;
        match self.model {
            SupervisedModel::Ridge => {
                let decay = self.hyper.lambda_eff;
                Ok(w.iter()
                    .zip(x)
                    .map(|(&wi, &xi)| wi + eta * (z * xi - decay * wi))
                    .collect())
            }
            SupervisedModel::Svm | SupervisedModel::Logistic => {
                if z == S::zero() {
                    return Ok(w.clone());
                }
                let gain = eta * z * y;
                Ok(w.iter().zip(x).map(|(&wi, &xi)| wi + gain * xi).collect())
            }
            SupervisedModel::ExpGrad => {
                let limit = S::c(EXPGRAD_MAX_EXPONENT);
                if let Some((k, e)) = x
                    .iter()
                    .map(|&xi| eta * z * xi)
                    .enumerate()
                    .find(|(_, e)| !(e.abs() <= limit))
                {
                    return Err(Error::StepSize(format!(
                        "multiplicative exponent {e} at synapse {k} exceeds {EXPGRAD_MAX_EXPONENT}"
                    )));
                }
                let mut next: Vec<S> = w
                    .iter()
                    .zip(x)
                    .map(|(&wi, &xi)| wi * (eta * z * xi).exp())
                    .collect();
                if self.hyper.normalize {
                    let total: S = next.iter().copied().sum();
                    next.iter_mut().for_each(|v| *v = *v / total);
                }
                if let Some(k) = next.iter().position(|v| !(*v > S::zero() && v.is_finite())) {
                    return Err(Error::StepSize(format!(
                        "multiplicative step left synapse {k} non-positive or non-finite"
                    )));
                }
                Ok(next)
            }
        }
    }

    pub fn step(&mut self, x: &[S], y: S) -> Result<StepOutcome<S>> {
        let eta = self.hyper.eta;
        self.step_with_rate(x, y, eta)
    }

    /// One online step with an explicit learning rate. The state is left
    /// untouched on error.
    pub fn step_with_rate(&mut self, x: &[S], y: S, eta: S) -> Result<StepOutcome<S>> {
        let (z, iters) = self.activity(x, y)?;
        let next = self.plasticity(z, x, y, eta)?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("weights after plasticity"));
        }
        let delta: Vec<S> = next.iter().zip(&self.w).map(|(&a, &b)| a - b).collect();
        self.w = next;
        Ok(StepOutcome {
            z: vec![z],
            update_norm: norm2(&delta),
            dynamics_iters: iters,
        })
    }
}
