use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::triplet::Triplet;
use crate::cqfb::FeatureVector;
use crate::error::{check_dims, Error, Result};

/// One base learner `w · z zᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneTerm {
    pub weight: f64,
    pub direction: Vec<f64>,
}

/// Settings a model was trained with, kept for the model file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingInfo {
    pub regularizer: f64,
    pub max_iterations: usize,
}

/// A PSD matrix stored both as its rank-one expansion and densely.
#[derive(Debug, Clone, PartialEq)]
pub struct MahalanobisModel {
    dim: usize,
    terms: Vec<RankOneTerm>,
    dense: DMatrix<f64>,
    loss_history: Vec<f64>,
    training: Option<TrainingInfo>,
}

const UNIT_TOL: f64 = 1e-9;

impl MahalanobisModel {
    /// The zero matrix: every distance is 0.
    pub fn zero(dim: usize) -> Self {
        MahalanobisModel {
            dim,
            terms: Vec::new(),
            dense: DMatrix::zeros(dim, dim),
            loss_history: Vec::new(),
            training: None,
        }
    }

    /// `M = I`, written as the sum of the coordinate projectors.
    pub fn identity(dim: usize) -> Self {
        let terms = (0..dim)
            .map(|i| {
                let mut z = vec![0.0; dim];
                z[i] = 1.0;
                RankOneTerm {
                    weight: 1.0,
                    direction: z,
                }
            })
            .collect();
        MahalanobisModel::from_terms(dim, terms).expect("coordinate axes are valid terms")
    }

    /// Builds `M` from its terms; weights must be non-negative and directions unit.
    pub fn from_terms(dim: usize, terms: Vec<RankOneTerm>) -> Result<Self> {
        let mut model = MahalanobisModel::zero(dim);
        for term in terms {
            model.push_term(term)?;
        }
        Ok(model)
    }

    pub(crate) fn push_term(&mut self, term: RankOneTerm) -> Result<()> {
        check_dims(self.dim, term.direction.len())?;
        if !(term.weight.is_finite() && term.weight >= 0.0) {
            return Err(Error::invalid(format!(
                "term weight must be finite and non-negative, got {}",
                term.weight
            )));
        }
        let norm = term.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!(
                "term direction must have unit norm, got {norm}"
            )));
        }
        let z = &term.direction;
        for r in 0..self.dim {
            for c in 0..self.dim {
                self.dense[(r, c)] += term.weight * z[r] * z[c];
            }
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn with_training_info(mut self, info: TrainingInfo) -> Self {
        self.training = Some(info);
        self
    }

    /// Replaces the dense matrix, e.g. with the exact rows stored in a model file.
    pub(crate) fn with_dense(mut self, dense: DMatrix<f64>) -> Result<Self> {
        if dense.nrows() != self.dim || dense.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: dense.nrows(),
            });
        }
        self.dense = dense;
        Ok(self)
    }

    pub(crate) fn with_loss_history(mut self, history: Vec<f64>) -> Self {
        self.loss_history = history;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[RankOneTerm] {
        &self.terms
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.dense
    }

    /// Objective value before the first round and after each accepted round.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn training_info(&self) -> Option<&TrainingInfo> {
        self.training.as_ref()
    }

    /// `trace(M) = sum_k w_k`, since every term has trace one.
    pub fn trace(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// Returns a new model whose matrix is `factor · M`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| RankOneTerm {
                weight: t.weight * factor,
                direction: t.direction.clone(),
            })
            .collect();
        MahalanobisModel::from_terms(self.dim, terms)
    }

    /// `(x - y)ᵀ M (x - y)`.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dims(self.dim, x.len())?;
        check_dims(self.dim, y.len())?;
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        Ok(self.quad_form(&d))
    }

    pub(crate) fn quad_form(&self, d: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for r in 0..n {
            let mut row = 0.0;
            for c in 0..n {
                row += self.dense[(r, c)] * d[c];
            }
            acc += d[r] * row;
        }
        acc
    }

    /// Checks the PSD-model invariants: non-negative weights, unit directions,
    /// a symmetric dense matrix whose trace equals the weight sum, a
    /// non-negative quadratic form on the supplied probes, and a
    /// non-increasing loss history.
    pub fn check_invariants(&self, probes: &[Vec<f64>]) -> Result<()> {
        for (k, t) in self.terms.iter().enumerate() {
            if t.weight.is_nan() || t.weight < 0.0 {
                return Err(Error::Numerical(format!("term {k} has negative weight")));
            }
            let norm = t.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::Numerical(format!(
                    "term {k} is not unit norm ({norm})"
                )));
            }
        }
        let scale = self.trace().max(1.0);
        for r in 0..self.dim {
            for c in 0..r {
                if (self.dense[(r, c)] - self.dense[(c, r)]).abs() > UNIT_TOL * scale {
                    return Err(Error::Numerical(format!(
                        "matrix not symmetric at ({r},{c})"
                    )));
                }
            }
        }
        if (self.dense.trace() - self.trace()).abs() > UNIT_TOL * scale {
            return Err(Error::Numerical(format!(
                "dense trace {} differs from weight sum {}",
                self.dense.trace(),
                self.trace()
            )));
        }
        for p in probes {
            check_dims(self.dim, p.len())?;
            let sq: f64 = p.iter().map(|v| v * v).sum();
            if self.quad_form(p) < -UNIT_TOL * sq * scale {
                return Err(Error::Numerical(
                    "quadratic form negative on a probe".into(),
                ));
            }
        }
        for (t, w) in self.loss_history.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(Error::Numerical(format!(
                    "loss increased at round {}: {} -> {}",
                    t + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(())
    }
}

/// `(x - y)ᵀ M (x - y)`: non-negative, symmetric, zero when `x == y`.
pub fn distance(x: &[f64], y: &[f64], model: &MahalanobisModel) -> Result<f64> {
    model.distance(x, y)
}

/// `d_M(anchor, negative) - d_M(anchor, positive)`; positive when the triplet
/// is satisfied.
pub fn margin(
    triplet: &Triplet,
    features: &[FeatureVector],
    model: &MahalanobisModel,
) -> Result<f64> {
    let get = |i: usize| {
        features
            .get(i)
            .map(|f| f.values())
            .ok_or_else(|| Error::invalid(format!("triplet index {i} out of range")))
    };
    let a = get(triplet.anchor)?;
    let p = get(triplet.positive)?;
    let n = get(triplet.negative)?;
    Ok(model.distance(a, n)? - model.distance(a, p)?)
}

/// Linear map `x -> Lᵀx` with `L Lᵀ ≈ M`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTransform {
    projection: DMatrix<f64>,
}

impl EmbeddingTransform {
    /// `L`, an `N × d` matrix.
    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    pub fn input_dim(&self) -> usize {
        self.projection.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.ncols()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dims(self.input_dim(), x.len())?;
        let v = DVector::from_column_slice(x);
        Ok(self.projection.tr_mul(&v).iter().copied().collect())
    }
}

/// Factors `M = V Λ Vᵀ` and keeps the eigenpairs with
/// `λ >= truncation_tol · λ_max` (and `λ > 0`), giving `L = V_d Λ_d^{1/2}`.
pub fn embedding_transform(
    model: &MahalanobisModel,
    truncation_tol: f64,
) -> Result<EmbeddingTransform> {
    if truncation_tol.is_nan() || truncation_tol < 0.0 {
        return Err(Error::invalid("truncation tolerance must be non-negative"));
    }
    if model.dense.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("cannot embed with an all-zero metric"));
    }
    let eig = SymmetricEigen::new(model.dense.clone());
    let lambda_max = eig.eigenvalues.max();
    let keep: Vec<usize> = (0..model.dim)
        .filter(|&i| {
            let l = eig.eigenvalues[i];
            l > 0.0 && l >= truncation_tol * lambda_max
        })
        .collect();
    let mut projection = DMatrix::zeros(model.dim, keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt();
        for r in 0..model.dim {
            projection[(r, col)] = eig.eigenvectors[(r, i)] * s;
        }
    }
    Ok(EmbeddingTransform { projection })
}
