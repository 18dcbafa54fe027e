use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use super::line_search::{log_sum_exp, LineObjective};
use super::model::{MahalanobisModel, RankOneTerm, TrainingInfo};
use super::power::{leading_eigenpair, EigenPair, POWER_MAX_ITERATIONS, POWER_TOLERANCE};
use super::triplet::Triplet;
use crate::cqfb::FeatureVector;
use crate::error::{check_dims, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Weight `v` of the trace penalty.
    pub regularizer: f64,
    pub max_iterations: usize,
    /// A base learner is added only if its eigenvalue exceeds `regularizer + convergence_tol`.
    pub convergence_tol: f64,
    /// Relative bracket width at which the step-size bisection stops.
    pub line_search_tol: f64,
    /// Upper bound on a single step; reached only when the loss keeps
    /// decreasing along the new direction without bound.
    pub max_step: f64,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            regularizer: 1e-7,
            max_iterations: 3000,
            convergence_tol: 1e-10,
            line_search_tol: 1e-9,
            max_step: 1e10,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.regularizer.is_finite() && self.regularizer >= 0.0) {
            return Err(Error::invalid(format!(
                "regularizer must be >= 0, got {}",
                self.regularizer
            )));
        }
        for (name, v) in [
            ("convergence_tol", self.convergence_tol),
            ("line_search_tol", self.line_search_tol),
            ("max_step", self.max_step),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    /// The best rank-one direction cannot lower the objective.
    NoImprovingLearner,
    /// The line search found no step that lowers the objective.
    NoProgress,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Added { weight: f64, eigenvalue: f64 },
    Stopped(StopReason),
}

/// Stagewise boosting state: earlier weights stay fixed and each round adds
/// one `w · z zᵀ`.
#[derive(Debug, Clone)]
pub struct Booster {
    config: TrainConfig,
    dim: usize,
    // per-triplet anchor-negative and anchor-positive differences, row-major
    neg_diffs: Vec<f64>,
    pos_diffs: Vec<f64>,
    margins: Vec<f64>,
    model: MahalanobisModel,
    loss_history: Vec<f64>,
    rng: Xoshiro256PlusPlus,
    rounds: usize,
    stopped: Option<StopReason>,
}

impl Booster {
    pub fn new(
        triplets: &[Triplet],
        features: &[FeatureVector],
        config: TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        if triplets.is_empty() {
            return Err(Error::invalid("no triplets to train on"));
        }
        let dim = features
            .first()
            .map(FeatureVector::dim)
            .ok_or_else(|| Error::invalid("empty feature set"))?;
        for f in features {
            check_dims(dim, f.dim())?;
            if f.values().iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("feature value".into()));
            }
        }

        let mut neg_diffs = Vec::with_capacity(triplets.len() * dim);
        let mut pos_diffs = Vec::with_capacity(triplets.len() * dim);
        for t in triplets {
            let get = |i: usize| {
                features
                    .get(i)
                    .map(FeatureVector::values)
                    .ok_or_else(|| Error::invalid(format!("triplet index {i} out of range")))
            };
            let (a, p, n) = (get(t.anchor)?, get(t.positive)?, get(t.negative)?);
            neg_diffs.extend(a.iter().zip(n).map(|(x, y)| x - y));
            pos_diffs.extend(a.iter().zip(p).map(|(x, y)| x - y));
        }

        let margins = vec![0.0; triplets.len()];
        let initial = log_sum_exp(margins.iter().map(|r| -r));
        Ok(Booster {
            config,
            dim,
            neg_diffs,
            pos_diffs,
            margins,
            model: MahalanobisModel::zero(dim),
            loss_history: vec![initial],
            rng: Xoshiro256PlusPlus::seed_from_u64(config.rng_seed),
            rounds: 0,
            stopped: None,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn margins(&self) -> &[f64] {
        &self.margins
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stopped
    }

    pub fn model(&self) -> &MahalanobisModel {
        &self.model
    }

    /// `log sum_r exp(-ρ_r) + v trace(M)` for the current model.
    pub fn objective(&self) -> f64 {
        log_sum_exp(self.margins.iter().map(|r| -r)) + self.config.regularizer * self.model.trace()
    }

    /// Normalized triplet weights `u_r = softmax(-ρ)_r`.
    pub fn triplet_weights(&self) -> Vec<f64> {
        let peak = self
            .margins
            .iter()
            .map(|r| -r)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut u: Vec<f64> = self.margins.iter().map(|r| (-r - peak).exp()).collect();
        let total: f64 = u.iter().sum();
        u.iter_mut().for_each(|x| *x /= total);
        u
    }

    /// `Â = sum_r u_r A_r` with `A_r = d_n d_nᵀ - d_p d_pᵀ`.
    pub fn constraint_matrix(&self) -> DMatrix<f64> {
        let n = self.dim;
        let u = self.triplet_weights();
        let mut acc = vec![0.0; n * n];
        for (r, &ur) in u.iter().enumerate() {
            if ur == 0.0 {
                continue;
            }
            let dn = &self.neg_diffs[r * n..(r + 1) * n];
            let dp = &self.pos_diffs[r * n..(r + 1) * n];
            for i in 0..n {
                let (ni, pi) = (ur * dn[i], ur * dp[i]);
                let row = &mut acc[i * n..(i + 1) * n];
                for j in i..n {
                    row[j] += ni * dn[j] - pi * dp[j];
                }
            }
        }
        DMatrix::from_fn(n, n, |i, j| {
            if i <= j {
                acc[i * n + j]
            } else {
                acc[j * n + i]
            }
        })
    }

    /// The candidate base learner: top eigenpair of `Â`, sign-normalized so
    /// its largest-magnitude component is positive.
    pub fn propose(&mut self) -> EigenPair {
        let a = self.constraint_matrix();
        let mut pair = leading_eigenpair(&a, POWER_TOLERANCE, POWER_MAX_ITERATIONS, &mut self.rng);
        let lead = pair.vector.iamax();
        if pair.vector[lead] < 0.0 {
            pair.vector.neg_mut();
        }
        pair
    }

    /// `h_r = (zᵀ d_n)² - (zᵀ d_p)²` for a unit direction `z`.
    pub fn gains(&self, direction: &[f64]) -> Vec<f64> {
        let n = self.dim;
        self.neg_diffs
            .chunks_exact(n)
            .zip(self.pos_diffs.chunks_exact(n))
            .map(|(dn, dp)| {
                let a: f64 = dn.iter().zip(direction).map(|(x, z)| x * z).sum();
                let b: f64 = dp.iter().zip(direction).map(|(x, z)| x * z).sum();
                a * a - b * b
            })
            .collect()
    }

    /// One boosting round.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if let Some(reason) = self.stopped {
            return Ok(StepOutcome::Stopped(reason));
        }
        if self.rounds >= self.config.max_iterations {
            return Ok(self.stop(StopReason::MaxIterations));
        }
        let v = self.config.regularizer;
        let pair = self.propose();
        if !pair.value.is_finite() {
            return Err(Error::Numerical(
                "non-finite eigenvalue in base learner search (feature scale overflowed; try log energies or standardizing)".into(),
            ));
        }
        if pair.value <= v + self.config.convergence_tol {
            return Ok(self.stop(StopReason::NoImprovingLearner));
        }

        let z: Vec<f64> = {
            let norm = pair.vector.norm();
            pair.vector.iter().map(|x| x / norm).collect()
        };
        let gains = self.gains(&z);
        let weight = LineObjective::new(&self.margins, &gains, v)
            .minimize(self.config.line_search_tol, self.config.max_step);
        if weight <= 0.0 {
            return Ok(self.stop(StopReason::NoProgress));
        }

        let updated: Vec<f64> = self
            .margins
            .iter()
            .zip(&gains)
            .map(|(r, h)| r + weight * h)
            .collect();
        let loss = log_sum_exp(updated.iter().map(|r| -r)) + v * (self.model.trace() + weight);
        if !loss.is_finite() {
            return Err(Error::Numerical(format!(
                "objective became non-finite in round {}",
                self.rounds + 1
            )));
        }
        let previous = *self.loss_history.last().expect("history starts non-empty");
        // rounding can make a near-zero step look like a tiny increase
        if loss > previous {
            return Ok(self.stop(StopReason::NoProgress));
        }

        self.model.push_term(RankOneTerm {
            weight,
            direction: z,
        })?;
        self.margins = updated;
        self.loss_history.push(loss);
        self.rounds += 1;
        Ok(StepOutcome::Added {
            weight,
            eigenvalue: pair.value,
        })
    }

    fn stop(&mut self, reason: StopReason) -> StepOutcome {
        self.stopped = Some(reason);
        StepOutcome::Stopped(reason)
    }

    /// Runs rounds until a stop condition.
    pub fn run(&mut self) -> Result<StopReason> {
        loop {
            if let StepOutcome::Stopped(reason) = self.step()? {
                return Ok(reason);
            }
        }
    }

    pub fn into_model(self) -> MahalanobisModel {
        let info = TrainingInfo {
            regularizer: self.config.regularizer,
            max_iterations: self.config.max_iterations,
        };
        self.model
            .with_loss_history(self.loss_history)
            .with_training_info(info)
    }
}

/// Learns `M` from the triplets by stagewise boosting.
pub fn train_metric(
    triplets: &[Triplet],
    features: &[FeatureVector],
    config: TrainConfig,
) -> Result<MahalanobisModel> {
    let mut booster = Booster::new(triplets, features, config)?;
    booster.run()?;
    Ok(booster.into_model())
}
