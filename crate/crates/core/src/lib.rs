//! Online learners derived from primal-dual formulations of regularized
//! models.
//!
//! Each supervised learner pairs a neuron whose activity is the optimal dual
//! variable of its sample (computed by relaxing neural dynamics to a fixed
//! point) with a local Hebbian weight update:
//!
//! | model | activity `z` | plasticity |
//! |-------|--------------|------------|
//! | ridge | `y − wᵀx` | `Δw = η z x` |
//! | SVM | `[1 − y wᵀx]₊ / κ` | `Δw = η z y x` |
//! | logistic | `σ(−y wᵀx)` | `Δw = η z y x` |
//! | exponentiated gradient | `y − wᵀx` | `w_k ← w_k exp(η z x_k)` |
//!
//! Similarity matching adds lateral inhibition: `M z = W x`, with
//! `ΔW ∝ z xᵀ − W` and `ΔM ∝ z zᵀ − M`.
//!
//! The [`oracles`] module solves the same problems in batch (closed-form
//! ridge, projected dual ascent, Jacobi eigendecomposition) so the online
//! results can be certified independently.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common case.

// `!(a > 0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod duality;
pub mod dynamics;
mod error;
pub mod json;
pub mod learners;
pub mod linalg;
pub mod oracles;
pub mod rng;
mod scalar;

pub use error::{Error, Result};
pub use scalar::{resolvable_tol, Scalar};

pub use datagen::{gen_classification, gen_regression, gen_spiked, Dataset, DatasetKind, DatasetMeta};
pub use duality::{DualModel, DualParams, LossModel, PrimalDualPoint, RegularizerModel};
pub use dynamics::{relax, DynamicsConfig, FixedPoint};
pub use learners::{
    train, Learner, Schedule, SimilarityMatching, StepOutcome, SupervisedHyper, SupervisedLearner,
    SupervisedModel, TrainOptions, TrainingReport,
};
pub use linalg::Matrix;

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type LossModel64 = LossModel<f64>;
pub type RegularizerModel64 = RegularizerModel<f64>;
pub type DualParams64 = DualParams<f64>;
pub type DynamicsConfig64 = DynamicsConfig<f64>;
pub type SupervisedLearner64 = SupervisedLearner<f64>;
pub type SupervisedLearner32 = SupervisedLearner<f32>;
pub type SimilarityMatching64 = SimilarityMatching<f64>;
pub type SimilarityMatching32 = SimilarityMatching<f32>;
pub type Learner64 = Learner<f64>;
pub type TrainingReport64 = TrainingReport<f64>;
