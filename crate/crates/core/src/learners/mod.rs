//! Online learners: neural dynamics compute the activity, a local Hebbian
//! rule updates the synapses.

mod similarity;
mod supervised;
mod train;

pub use similarity::SimilarityMatching;
pub use supervised::{
    StepOutcome, SupervisedHyper, SupervisedLearner, SupervisedModel, EXPGRAD_MAX_EXPONENT,
};
pub use train::{
    train, EpochRecord, Learner, LearnerSnapshot, Schedule, TrainOptions, TrainingReport,
    UPDATE_EPS,
};
