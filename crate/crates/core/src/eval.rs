//! Classifiers and class-separability measures.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::boost::MahalanobisModel;
use crate::cqfb::FeatureVector;
use crate::error::{check_dims, Error, Result};

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        self.values()
    }
}

/// Distance used by the classifiers and separability measures.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// Squared Euclidean distance.
    Euclidean,
    /// `(x - y)ᵀ M (x - y)` for a learned `M`.
    Learned(MahalanobisModel),
}

impl Metric {
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            Metric::Euclidean => {
                check_dims(x.len(), y.len())?;
                Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
            }
            Metric::Learned(model) => model.distance(x, y),
        }
    }
}

fn labels(features: &[FeatureVector]) -> Result<Vec<&str>> {
    crate::boost::labels_of(features)
}

/// Majority vote among the `k` nearest training points.
///
/// Neighbors are ranked by distance, then by training index. A vote tie goes
/// to the tied class with the smallest summed neighbor distance, then to the
/// smallest class id.
pub fn knn_classify(
    train: &[FeatureVector],
    test: &[FeatureVector],
    k: usize,
    metric: &Metric,
) -> Result<Vec<String>> {
    if train.is_empty() {
        return Err(Error::invalid("k-NN needs a non-empty training set"));
    }
    if k == 0 || k > train.len() {
        return Err(Error::invalid(format!(
            "k must be in 1..={}, got {k}",
            train.len()
        )));
    }
    let train_labels = labels(train)?;

    test.iter()
        .map(|query| {
            let mut ranked = train
                .iter()
                .enumerate()
                .map(|(i, t)| Ok((metric.distance(query.values(), t.values())?, i)))
                .collect::<Result<Vec<(f64, usize)>>>()?;
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

            let mut votes: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
            for &(d, i) in &ranked[..k] {
                let e = votes.entry(train_labels[i]).or_insert((0, 0.0));
                e.0 += 1;
                e.1 += d;
            }
            // BTreeMap iterates in class-id order, so `min_by` keeps the first on full ties
            let winner = votes
                .iter()
                .min_by(|a, b| {
                    b.1 .0
                        .cmp(&a.1 .0)
                        .then_with(|| a.1 .1.total_cmp(&b.1 .1))
                        .then_with(|| a.0.cmp(b.0))
                })
                .map(|(l, _)| l.to_string())
                .expect("k >= 1 gives at least one vote");
            Ok(winner)
        })
        .collect()
}

/// Per-class, per-dimension Gaussian likelihoods.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    classes: Vec<String>,
    log_priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

pub const NB_VARIANCE_FLOOR: f64 = 1e-12;

impl GaussianNb {
    pub fn fit(train: &[FeatureVector]) -> Result<Self> {
        let train_labels = labels(train)?;
        let dim = train
            .first()
            .map(FeatureVector::dim)
            .ok_or_else(|| Error::invalid("naive Bayes needs a non-empty training set"))?;
        let mut groups: BTreeMap<&str, Vec<&[f64]>> = BTreeMap::new();
        for (f, l) in train.iter().zip(&train_labels) {
            check_dims(dim, f.dim())?;
            groups.entry(l).or_default().push(f.values());
        }
        let total = train.len() as f64;
        let mut model = GaussianNb {
            classes: Vec::new(),
            log_priors: Vec::new(),
            means: Vec::new(),
            variances: Vec::new(),
        };
        for (label, rows) in groups {
            if rows.len() < 2 {
                return Err(Error::invalid(format!(
                    "class '{label}' has {} training sample(s); naive Bayes needs 2",
                    rows.len()
                )));
            }
            let n = rows.len() as f64;
            let mean: Vec<f64> = (0..dim)
                .map(|d| rows.iter().map(|r| r[d]).sum::<f64>() / n)
                .collect();
            let var: Vec<f64> = (0..dim)
                .map(|d| {
                    let ss: f64 = rows.iter().map(|r| (r[d] - mean[d]).powi(2)).sum();
                    (ss / (n - 1.0)).max(NB_VARIANCE_FLOOR)
                })
                .collect();
            model.classes.push(label.to_string());
            model.log_priors.push((n / total).ln());
            model.means.push(mean);
            model.variances.push(var);
        }
        Ok(model)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Log-posterior up to a shared constant, one entry per class.
    pub fn log_posteriors(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dims(self.means[0].len(), x.len())?;
        Ok((0..self.classes.len())
            .map(|c| {
                self.log_priors[c]
                    + x.iter()
                        .zip(&self.means[c])
                        .zip(&self.variances[c])
                        .map(|((v, m), s2)| {
                            -0.5 * (2.0 * std::f64::consts::PI * s2).ln()
                                - (v - m).powi(2) / (2.0 * s2)
                        })
                        .sum::<f64>()
            })
            .collect())
    }

    /// Highest log-posterior; ties go to the smaller class id.
    pub fn predict(&self, x: &[f64]) -> Result<String> {
        let scores = self.log_posteriors(x)?;
        let mut best = 0;
        for (c, s) in scores.iter().enumerate().skip(1) {
            if *s > scores[best] {
                best = c;
            }
        }
        Ok(self.classes[best].clone())
    }
}

pub fn gaussian_nb(train: &[FeatureVector], test: &[FeatureVector]) -> Result<Vec<String>> {
    let model = GaussianNb::fit(train)?;
    test.iter().map(|f| model.predict(f.values())).collect()
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    class_ids: Vec<String>,
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    /// Classes are the sorted union of true and predicted labels.
    pub fn from_labels<T: AsRef<str>, P: AsRef<str>>(truth: &[T], predicted: &[P]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                actual: predicted.len(),
            });
        }
        let mut ids: Vec<String> = truth
            .iter()
            .map(|t| t.as_ref().to_string())
            .chain(predicted.iter().map(|p| p.as_ref().to_string()))
            .collect();
        ids.sort();
        ids.dedup();
        let pos = |s: &str| {
            ids.binary_search_by(|x| x.as_str().cmp(s))
                .expect("id present")
        };
        let mut counts = vec![vec![0; ids.len()]; ids.len()];
        for (t, p) in truth.iter().zip(predicted) {
            counts[pos(t.as_ref())][pos(p.as_ref())] += 1;
        }
        Ok(ConfusionMatrix {
            class_ids: ids,
            counts,
        })
    }

    pub fn from_counts(class_ids: Vec<String>, counts: Vec<Vec<usize>>) -> Result<Self> {
        let n = class_ids.len();
        if counts.len() != n || counts.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(
                "confusion counts must be square over the class ids",
            ));
        }
        Ok(ConfusionMatrix { class_ids, counts })
    }

    pub fn class_ids(&self) -> &[String] {
        &self.class_ids
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn to_csv(&self) -> String {
        matrix_csv(&self.class_ids, |r, c| self.counts[r][c].to_string())
    }
}

/// Fraction of correctly classified samples.
pub fn accuracy(confusion: &ConfusionMatrix) -> Result<f64> {
    let total = confusion.total();
    if total == 0 {
        return Err(Error::invalid("accuracy of an empty confusion matrix"));
    }
    Ok(confusion.correct() as f64 / total as f64)
}

/// Fraction of triplets `(x_i, x_j, x_k)`, with `x_i != x_j` ordered samples
/// of class `b` and `x_k` from class `c`, where `d(x_i, x_j) < d(x_i, x_k)`
/// holds strictly.
pub fn dissimilarity_index<T: AsRef<[f64]>>(
    class_b: &[T],
    class_c: &[T],
    metric: &Metric,
) -> Result<f64> {
    let nb = class_b.len();
    if nb < 2 {
        return Err(Error::invalid(format!(
            "dissimilarity index needs at least 2 samples in the first class, got {nb}"
        )));
    }
    if class_c.is_empty() {
        return Err(Error::invalid(
            "dissimilarity index needs a non-empty second class",
        ));
    }
    let mut satisfied: u64 = 0;
    for (i, xi) in class_b.iter().enumerate() {
        let mut to_c = class_c
            .iter()
            .map(|xk| metric.distance(xi.as_ref(), xk.as_ref()))
            .collect::<Result<Vec<f64>>>()?;
        to_c.sort_by(f64::total_cmp);
        for (j, xj) in class_b.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = metric.distance(xi.as_ref(), xj.as_ref())?;
            // count of d_ik strictly greater than d
            let not_greater = to_c.partition_point(|&x| x <= d);
            satisfied += (to_c.len() - not_greater) as u64;
        }
    }
    let total = (nb * (nb - 1) * class_c.len()) as f64;
    Ok(satisfied as f64 / total)
}

/// Pairwise dissimilarity indices over all classes.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    class_ids: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl DissimilarityMatrix {
    pub fn from_values(class_ids: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = class_ids.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(
                "dissimilarity values must be square over the class ids",
            ));
        }
        for (b, row) in values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if b != c && !(0.0..=1.0).contains(v) {
                    return Err(Error::invalid(format!(
                        "p[{b}][{c}] = {v} is outside [0, 1]"
                    )));
                }
            }
        }
        Ok(DissimilarityMatrix { class_ids, values })
    }

    pub fn class_ids(&self) -> &[String] {
        &self.class_ids
    }

    /// `values()[b][c]` is `p_bc`; the diagonal is unused and left at 0.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn to_csv(&self) -> String {
        matrix_csv(&self.class_ids, |r, c| format!("{:.9}", self.values[r][c]))
    }
}

/// `p_bc` for every ordered pair of distinct classes, classes in id order.
pub fn dissimilarity_matrix(
    features: &[FeatureVector],
    metric: &Metric,
) -> Result<DissimilarityMatrix> {
    let mut groups: BTreeMap<&str, Vec<&[f64]>> = BTreeMap::new();
    for (f, l) in features.iter().zip(labels(features)?) {
        groups.entry(l).or_default().push(f.values());
    }
    if groups.len() < 2 {
        return Err(Error::invalid(format!(
            "discrimination needs at least 2 classes, got {}",
            groups.len()
        )));
    }
    let ids: Vec<String> = groups.keys().map(|s| s.to_string()).collect();
    let members: Vec<&Vec<&[f64]>> = groups.values().collect();
    let n = ids.len();
    let mut values = vec![vec![0.0; n]; n];
    for b in 0..n {
        for c in 0..n {
            if b != c {
                values[b][c] = dissimilarity_index(members[b], members[c], metric)?;
            }
        }
    }
    DissimilarityMatrix::from_values(ids, values)
}

/// Mean of `1 - p_bc` over ordered off-diagonal pairs, in percent.
pub fn discrimination_error(dis: &DissimilarityMatrix) -> Result<f64> {
    let n = dis.class_ids.len();
    if n < 2 {
        return Err(Error::invalid(
            "discrimination error needs at least 2 classes",
        ));
    }
    let mut sum = 0.0;
    for b in 0..n {
        for c in 0..n {
            if b != c {
                sum += 1.0 - dis.values[b][c];
            }
        }
    }
    Ok(100.0 * sum / (n * (n - 1)) as f64)
}

/// Keeps `per_class` randomly chosen samples of each class (all of them when a
/// class is smaller), preserving the input order.
pub fn sample_representatives(
    features: &[FeatureVector],
    per_class: usize,
    seed: u64,
) -> Result<Vec<FeatureVector>> {
    if per_class == 0 {
        return Err(Error::invalid("representatives per class must be >= 1"));
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels(features)?.into_iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut keep = Vec::new();
    for members in groups.values() {
        if members.len() <= per_class {
            keep.extend_from_slice(members);
        } else {
            keep.extend(
                index::sample(&mut rng, members.len(), per_class)
                    .into_iter()
                    .map(|i| members[i]),
            );
        }
    }
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| features[i].clone()).collect())
}

fn matrix_csv(ids: &[String], cell: impl Fn(usize, usize) -> String) -> String {
    let mut out = String::from("class");
    for id in ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for (r, id) in ids.iter().enumerate() {
        out.push_str(id);
        for c in 0..ids.len() {
            let _ = write!(out, ",{}", cell(r, c));
        }
        out.push('\n');
    }
    out
}
