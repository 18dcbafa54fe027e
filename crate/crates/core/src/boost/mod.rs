//! Mahalanobis metric learning by boosting rank-one, trace-one base learners.
//!
//! The learned matrix is `M = sum_k w_k z_k z_kᵀ` with `w_k >= 0` and unit
//! `z_k`, so it is positive semidefinite after every round. Each round picks
//! the leading eigenvector of the loss-weighted constraint matrix as the new
//! base learner and sizes its weight with an exact line search on the
//! regularized exponential loss.

mod line_search;
mod model;
mod power;
mod train;
mod triplet;

pub use line_search::LineObjective;
pub use model::{
    distance, embedding_transform, margin, EmbeddingTransform, MahalanobisModel, RankOneTerm,
    TrainingInfo,
};
pub use power::{leading_eigenpair, EigenPair, POWER_MAX_ITERATIONS, POWER_TOLERANCE};
pub use train::{train_metric, Booster, StepOutcome, StopReason, TrainConfig};
pub(crate) use triplet::labels_of;
pub use triplet::{generate_triplets, Triplet};
