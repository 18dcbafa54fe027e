//! Vibration-texture features and learned Mahalanobis metrics.
//!
//! Pipeline: a 3-axis acceleration [`Signal`] is reduced to one magnitude
//! [`Spectrum`] (DFT321), truncated, and summarized by a constant-Q Gaussian
//! filter bank into a [`FeatureVector`]. A PSD metric is then learned from
//! class-labeled triplets by boosting rank-one base learners, and the
//! [`eval`] module measures k-NN / naive Bayes accuracy and pairwise class
//! separability under either the Euclidean or the learned metric.

pub mod boost;
pub mod cqfb;
pub mod dataio;
pub mod error;
pub mod eval;
pub mod signal;

pub use nalgebra;

pub use boost::{
    distance, embedding_transform, generate_triplets, margin, train_metric, EmbeddingTransform,
    MahalanobisModel, TrainConfig, Triplet,
};
pub use cqfb::{
    build_filter_bank, extract_features, signal_features, FeatureVector, FilterBank,
    FilterBankConfig, IntegrationMode,
};
pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, DissimilarityMatrix, Metric};
pub use signal::{dft321_magnitude, truncate_spectrum, Signal, Spectrum};
