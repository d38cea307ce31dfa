use serde::{Deserialize, Serialize};

use crate::datagen::Dataset;
use crate::duality::{DualParams, LossModel, PrimalDualPoint, RegularizerModel};
use crate::error::{Error, Result};
use crate::learners::{SimilarityMatching, StepOutcome, SupervisedLearner, SupervisedModel};
use crate::linalg::{dot, solve_matrix, Matrix};
use crate::oracles::{pca_subspace, subspace_error};
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// Steps with `update_norm` above this count as plastic.
pub const UPDATE_EPS: f64 = 1e-12;

/// Learning-rate schedule, indexed by epoch (starting at 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant,
    /// `η_e = η / (1 + decay · e)`
    InverseTime { decay: f64 },
}

impl Schedule {
    pub fn factor<S: Scalar>(&self, epoch: usize) -> S {
        match *self {
            Schedule::Constant => S::one(),
            Schedule::InverseTime { decay } => S::one() / (S::one() + S::c(decay * epoch as f64)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub epochs: usize,
    pub schedule: Schedule,
    /// Visit samples in a seeded random order each epoch instead of in
    /// dataset order.
    pub shuffle_seed: Option<u64>,
    /// Regularization strength used for the reported objectives.
    pub lambda: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 1,
            schedule: Schedule::Constant,
            shuffle_seed: None,
            lambda: 0.1,
        }
    }
}

/// Either learner family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Learner<S> {
    Supervised(SupervisedLearner<S>),
    Similarity(SimilarityMatching<S>),
}

impl<S: Scalar> Learner<S> {
    pub fn snapshot(&self) -> LearnerSnapshot<S> {
        match self {
            Learner::Supervised(l) => LearnerSnapshot::Weights { w: l.w.clone() },
            Learner::Similarity(sm) => LearnerSnapshot::Similarity {
                w: sm.w.clone(),
                m: sm.m.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSnapshot<S> {
    Weights { w: Vec<S> },
    Similarity { w: Matrix<S>, m: Matrix<S> },
}

/// Metrics recorded at the end of one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord<S> {
    /// 1-based epoch number.
    pub epoch: usize,
    pub learning_rate: S,
    pub primal_objective: Option<S>,
    pub dual_objective: Option<S>,
    pub duality_gap: Option<S>,
    pub mean_update_norm: S,
    pub max_update_norm: S,
    /// Fraction of steps whose update norm exceeded [`UPDATE_EPS`].
    pub update_density: S,
    /// Mean squared error (regression), misclassification rate
    /// (classification) or subspace error against the data's principal
    /// subspace (similarity matching).
    pub train_error: Option<S>,
    /// Per-sample dual variables at the epoch's final weights; `T·m`
    /// activities, sample-major, for similarity matching.
    pub duals: Vec<S>,
    pub max_dynamics_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport<S> {
    pub initial: LearnerSnapshot<S>,
    pub epochs: Vec<EpochRecord<S>>,
    pub learner: Learner<S>,
}

impl<S: Scalar> TrainingReport<S> {
    pub fn last(&self) -> Option<&EpochRecord<S>> {
        self.epochs.last()
    }
}

fn sample_order(t: usize, epoch: usize, shuffle_seed: Option<u64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..t).collect();
    if let Some(seed) = shuffle_seed {
        let mut rng = SeededRng::new(seed.wrapping_add(epoch as u64));
        for i in (1..t).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            order.swap(i, j);
        }
    }
    order
}

/// Runs `opts.epochs` sweeps of online steps over `data`.
///
/// Deterministic in `(learner, data, opts)`. Any failing step aborts the run
/// with its epoch and sample index.
pub fn train<S: Scalar>(
    mut learner: Learner<S>,
    data: &Dataset,
    opts: &TrainOptions,
) -> Result<TrainingReport<S>> {
    let x: Matrix<S> = data.x.map(S::c);
    let y: Option<Vec<S>> = data.y.as_ref().map(|y| y.iter().map(|&v| S::c(v)).collect());
    let t = x.ncols();
    check_compatible(&learner, data)?;
    let evaluator = Evaluator::new(&learner, &x, y.as_deref(), opts)?;

    let initial = learner.snapshot();
    let mut epochs = Vec::with_capacity(opts.epochs);
    for e in 0..opts.epochs {
        let factor: S = opts.schedule.factor(e);
        let mut norms = Vec::with_capacity(t);
        let mut max_iters = 0;
        for idx in sample_order(t, e, opts.shuffle_seed) {
            let xt = x.col(idx);
            let out: Result<StepOutcome<S>> = match &mut learner {
                Learner::Supervised(l) => {
                    let eta = l.hyper.eta * factor;
                    let yt = y.as_ref().expect("checked")[idx];
                    l.step_with_rate(xt, yt, eta)
                }
                Learner::Similarity(sm) => {
                    let (ew, em) = (sm.eta_w * factor, sm.eta_m * factor);
                    sm.step_with_rates(xt, ew, em)
                }
            };
            let out = out.map_err(|source| Error::Training {
                epoch: e + 1,
                index: idx,
                source: Box::new(source),
            })?;
            max_iters = max_iters.max(out.dynamics_iters);
            norms.push(out.update_norm);
        }
        let count = S::from_count(norms.len().max(1));
        let plastic = norms.iter().filter(|&&v| v > S::c(UPDATE_EPS)).count();
        let mut rec = evaluator.evaluate(&learner, &x, y.as_deref())?;
        rec.epoch = e + 1;
        rec.learning_rate = match &learner {
            Learner::Supervised(l) => l.hyper.eta * factor,
            Learner::Similarity(sm) => sm.eta_w * factor,
        };
        rec.mean_update_norm = norms.iter().copied().sum::<S>() / count;
        rec.max_update_norm = norms.iter().copied().fold(S::zero(), S::max);
        rec.update_density = S::from_count(plastic) / count;
        rec.max_dynamics_iters = max_iters;
        epochs.push(rec);
    }
    Ok(TrainingReport {
        initial,
        epochs,
        learner,
    })
}

fn check_compatible<S: Scalar>(learner: &Learner<S>, data: &Dataset) -> Result<()> {
    match learner {
        Learner::Supervised(l) => {
            if l.n() != data.n() {
                return Err(Error::DimensionMismatch {
                    what: "learner weights vs dataset features",
                    expected: data.n(),
                    found: l.n(),
                });
            }
            if data.y.is_none() {
                return Err(Error::Dataset("supervised learner needs labels".into()));
            }
            if l.model.requires_sign_labels() && !data.has_sign_labels() {
                return Err(Error::Dataset(
                    "classification learner needs labels in {-1, +1}".into(),
                ));
            }
        }
        Learner::Similarity(sm) => {
            if sm.input_dim() != data.n() {
                return Err(Error::DimensionMismatch {
                    what: "network inputs vs dataset features",
                    expected: data.n(),
                    found: sm.input_dim(),
                });
            }
        }
    }
    Ok(())
}

/// Per-epoch metric evaluation with the pieces that do not change across
/// epochs precomputed.
struct Evaluator<S> {
    params: DualParams<S>,
    entropy: Option<RegularizerModel<S>>,
    pca: Option<Matrix<S>>,
}

impl<S: Scalar> Evaluator<S> {
    fn new(learner: &Learner<S>, x: &Matrix<S>, _y: Option<&[S]>, opts: &TrainOptions) -> Result<Self> {
        let lambda = S::c(opts.lambda);
        let kappa = match learner {
            Learner::Supervised(l) => l.hyper.kappa,
            Learner::Similarity(_) => S::one(),
        };
        let params = DualParams::new(lambda, kappa)?;
        let entropy = match learner {
            Learner::Supervised(l) if l.model == SupervisedModel::ExpGrad => Some(
                RegularizerModel::entropy(lambda, l.hyper.mu.clone().expect("set at construction"))?,
            ),
            _ => None,
        };
        let pca = match learner {
            Learner::Similarity(sm) => Some(pca_subspace(x, sm.output_dim())?.basis),
            _ => None,
        };
        Ok(Self {
            params,
            entropy,
            pca,
        })
    }

    fn evaluate(&self, learner: &Learner<S>, x: &Matrix<S>, y: Option<&[S]>) -> Result<EpochRecord<S>> {
        let mut rec = EpochRecord {
            epoch: 0,
            learning_rate: S::zero(),
            primal_objective: None,
            dual_objective: None,
            duality_gap: None,
            mean_update_norm: S::zero(),
            max_update_norm: S::zero(),
            update_density: S::zero(),
            train_error: None,
            duals: Vec::new(),
            max_dynamics_iters: 0,
        };
        match learner {
            Learner::Supervised(l) => {
                let y = y.expect("checked");
                rec.train_error = Some(training_error(l, x, y));
                if let Some(dual) = l.model.dual_model() {
                    let point =
                        PrimalDualPoint::from_weights(dual, l.w.clone(), x, y, self.params.kappa)?;
                    let p = dual.matched_primal(&point.w, x, y, &self.params)?;
                    let d = dual.dual_objective(&point.z, x, y, &self.params)?;
                    rec.primal_objective = Some(p);
                    rec.dual_objective = Some(d);
                    rec.duality_gap = Some(p - d);
                    rec.duals = point.z;
                } else {
                    let reg = self.entropy.as_ref().expect("expgrad regularizer");
                    rec.primal_objective =
                        Some(crate::duality::primal_objective(&LossModel::Square, reg, &l.w, x, y)?);
                    rec.duals = x.columns().zip(y).map(|(xt, &yt)| yt - dot(&l.w, xt)).collect();
                }
            }
            Learner::Similarity(sm) => {
                let basis = sm.filter_basis()?;
                if let Some(pca) = &self.pca {
                    if basis.ncols() == pca.ncols() {
                        rec.train_error = Some(subspace_error(&basis, pca)?);
                    }
                }
                let wx = sm.w.matmul(x)?;
                let z = solve_matrix(&sm.m, &wx)?;
                rec.duals = z.as_slice().to_vec();
            }
        }
        Ok(rec)
    }
}

fn training_error<S: Scalar>(l: &SupervisedLearner<S>, x: &Matrix<S>, y: &[S]) -> S {
    let t = S::from_count(x.ncols().max(1));
    let total: S = x
        .columns()
        .zip(y)
        .map(|(xt, &yt)| {
            let u = dot(&l.w, xt);
            if l.model.requires_sign_labels() {
                if yt * u > S::zero() {
                    S::zero()
                } else {
                    S::one()
                }
            } else {
                (yt - u) * (yt - u)
            }
        })
        .sum();
    total / t
}
