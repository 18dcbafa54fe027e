//! Constant-Q Gaussian filter bank and the per-bin spectral energy feature.
//!
//! Centers and widths grow geometrically by the ratio `alpha`, so
//! `center / sigma` is the same for every window. The last center sits on
//! `f_max` and the first window decays to 10% of its peak at 0 Hz, which fixes
//! `sigma_1 = f_c1 / sqrt(2 ln 10)`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{dft321_magnitude, truncate_spectrum, Signal, Spectrum};

/// Peak-to-DC attenuation of the first window.
pub const DC_ATTENUATION: f64 = 0.1;

/// `sqrt(2 ln(1 / DC_ATTENUATION))`, the ratio `f_c / sigma` of every window.
pub fn q_factor() -> f64 {
    (2.0 * (1.0 / DC_ATTENUATION).ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterBankConfig {
    pub n_bins: usize,
    pub alpha: f64,
    pub f_max: f64,
}

impl FilterBankConfig {
    pub fn new(n_bins: usize, alpha: f64, f_max: f64) -> Result<Self> {
        let cfg = FilterBankConfig {
            n_bins,
            alpha,
            f_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::invalid(format!(
                "filter bank needs at least 2 bins, got {}",
                self.n_bins
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return Err(Error::invalid(format!(
                "alpha must be >= 1, got {}",
                self.alpha
            )));
        }
        if !(self.f_max.is_finite() && self.f_max > 0.0) {
            return Err(Error::invalid(format!(
                "f_max must be positive, got {}",
                self.f_max
            )));
        }
        Ok(())
    }
}

impl Default for FilterBankConfig {
    fn default() -> Self {
        FilterBankConfig {
            n_bins: 11,
            alpha: 1.8,
            f_max: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    centers: Vec<f64>,
    sigmas: Vec<f64>,
    edges: Vec<f64>,
    config: FilterBankConfig,
}

impl FilterBank {
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// Bin boundaries `f_0 = 0 <= f_1 <= ... <= f_N = f_max`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn config(&self) -> &FilterBankConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Unit-peak Gaussian response of window `j` (0-based) at `freq`.
    pub fn weight(&self, j: usize, freq: f64) -> f64 {
        let d = freq - self.centers[j];
        let s = self.sigmas[j];
        (-(d * d) / (2.0 * s * s)).exp()
    }
}

pub fn build_filter_bank(config: FilterBankConfig) -> Result<FilterBank> {
    config.validate()?;
    let n = config.n_bins;
    let q = q_factor();

    let (centers, sigmas, edges) = if config.alpha > 1.0 {
        let first = config.f_max / config.alpha.powi(n as i32 - 1);
        let sigma1 = first / q;
        let mut centers: Vec<f64> = (0..n)
            .map(|j| config.alpha.powi(j as i32) * first)
            .collect();
        let sigmas = (0..n)
            .map(|j| config.alpha.powi(j as i32) * sigma1)
            .collect();
        centers[n - 1] = config.f_max;
        let edges = bin_edges(&centers, config.f_max, |a, b| (a * b).sqrt());
        (centers, sigmas, edges)
    } else {
        // alpha = 1: evenly spaced windows of constant width
        let step = config.f_max / n as f64;
        let mut centers: Vec<f64> = (1..=n).map(|j| j as f64 * step).collect();
        centers[n - 1] = config.f_max;
        let sigmas = vec![step / q; n];
        let edges = bin_edges(&centers, config.f_max, |a, b| 0.5 * (a + b));
        (centers, sigmas, edges)
    };

    Ok(FilterBank {
        centers,
        sigmas,
        edges,
        config,
    })
}

fn bin_edges(centers: &[f64], f_max: f64, mid: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut edges = Vec::with_capacity(centers.len() + 1);
    edges.push(0.0);
    edges.extend(centers.windows(2).map(|w| mid(w[0], w[1])));
    edges.push(f_max);
    edges
}

/// Frequency support each window integrates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegrationMode {
    /// Every window weights the whole `[0, f_max]` range.
    #[default]
    Full,
    /// Window `j` only integrates `[edges[j-1], edges[j]]`.
    Bounded,
}

impl FromStr for IntegrationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(IntegrationMode::Full),
            "bounded" => Ok(IntegrationMode::Bounded),
            other => Err(Error::invalid(format!(
                "unknown integration mode '{other}' (expected full or bounded)"
            ))),
        }
    }
}

/// One sample's feature vector plus an optional class label.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    label: Option<String>,
}

impl FeatureVector {
    /// Raw spectral energies: finite and non-negative.
    pub fn new(energies: Vec<f64>, label: Option<String>) -> Result<Self> {
        if let Some(j) = energies.iter().position(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::invalid(format!(
                "energy component {j} is negative or non-finite"
            )));
        }
        Ok(FeatureVector {
            values: energies,
            label,
        })
    }

    /// Transformed features (e.g. standardized); only finiteness is required.
    pub fn transformed(values: Vec<f64>, label: Option<String>) -> Result<Self> {
        if let Some(j) = values.iter().position(|a| !a.is_finite()) {
            return Err(Error::NonFinite(format!("feature component {j}")));
        }
        Ok(FeatureVector { values, label })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// Spectral energy under each window:
/// `a_j = sum_w W_j(w) |Y(w)|² df` over the support chosen by `mode`.
pub fn extract_features(
    spectrum: &Spectrum,
    bank: &FilterBank,
    mode: IntegrationMode,
) -> Result<FeatureVector> {
    if spectrum.is_empty() {
        return Err(Error::invalid("empty spectrum"));
    }
    let df = spectrum.freq_resolution();
    if (spectrum.f_max() - bank.config.f_max).abs() > df {
        return Err(Error::invalid(format!(
            "spectrum f_max {} Hz does not match filter bank f_max {} Hz",
            spectrum.f_max(),
            bank.config.f_max
        )));
    }

    let power: Vec<f64> = spectrum.power().collect();
    let last = power.len() - 1;
    let energies = (0..bank.len())
        .map(|j| {
            let (lo, hi) = match mode {
                IntegrationMode::Full => (0, last),
                IntegrationMode::Bounded => {
                    let lo = (bank.edges[j] / df - 1e-9).ceil().max(0.0) as usize;
                    let hi = ((bank.edges[j + 1] / df + 1e-9).floor() as usize).min(last);
                    (lo, hi)
                }
            };
            if lo > hi {
                return 0.0;
            }
            power[lo..=hi]
                .iter()
                .enumerate()
                .map(|(i, p)| bank.weight(j, (lo + i) as f64 * df) * p)
                .sum::<f64>()
                * df
        })
        .collect();
    FeatureVector::new(energies, None)
}

/// DFT321 magnitude, truncated to the bank's `f_max`, then [`extract_features`].
pub fn signal_features(
    signal: &Signal,
    bank: &FilterBank,
    mode: IntegrationMode,
) -> Result<FeatureVector> {
    let spectrum = truncate_spectrum(&dft321_magnitude(signal), bank.config.f_max)?;
    extract_features(&spectrum, bank, mode)
}

/// Elementwise `ln(1 + a)`.
pub fn log_energy(features: &FeatureVector) -> FeatureVector {
    FeatureVector {
        values: features.values.iter().map(|a| a.ln_1p()).collect(),
        label: features.label.clone(),
    }
}

/// Per-dimension z-scoring with statistics taken from a reference set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(features: &[FeatureVector]) -> Result<Self> {
        let first = features
            .first()
            .ok_or_else(|| Error::invalid("cannot standardize an empty feature set"))?;
        let dim = first.dim();
        let n = features.len() as f64;
        let mut mean = vec![0.0; dim];
        for f in features {
            crate::error::check_dims(dim, f.dim())?;
            for (m, v) in mean.iter_mut().zip(f.values()) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; dim];
        for f in features {
            for ((s, v), m) in var.iter_mut().zip(f.values()).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        // constant columns pass through centered but unscaled
        let scale = var
            .into_iter()
            .map(|v| if v > 0.0 { v.sqrt() } else { 1.0 })
            .collect();
        Ok(Standardizer { mean, scale })
    }

    pub fn apply(&self, features: &FeatureVector) -> Result<FeatureVector> {
        crate::error::check_dims(self.mean.len(), features.dim())?;
        let values = features
            .values()
            .iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect();
        FeatureVector::transformed(values, features.label.clone())
    }

    pub fn apply_all(&self, features: &[FeatureVector]) -> Result<Vec<FeatureVector>> {
        features.iter().map(|f| self.apply(f)).collect()
    }
}
