use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::Deserialize;
use texmetric_core::{FilterBankConfig, IntegrationMode, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Classifier {
    Knn,
    Nb,
}

/// Settings shared by every subcommand. Read from a TOML file, then
/// overridden by command-line flags.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub bins: usize,
    pub alpha: f64,
    pub fmax: f64,
    pub mode: IntegrationMode,
    pub log_energy: bool,
    pub standardize: bool,
    pub regularizer: f64,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub line_search_tol: f64,
    pub max_step: f64,
    pub impostors_per_pair: usize,
    pub k: usize,
    pub classifier: Classifier,
    pub seed: u64,
    pub representatives: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let fb = FilterBankConfig::default();
        let tc = TrainConfig::default();
        PipelineConfig {
            bins: fb.n_bins,
            alpha: fb.alpha,
            fmax: fb.f_max,
            mode: IntegrationMode::Full,
            log_energy: false,
            standardize: false,
            regularizer: tc.regularizer,
            max_iterations: tc.max_iterations,
            convergence_tol: tc.convergence_tol,
            line_search_tol: tc.line_search_tol,
            max_step: tc.max_step,
            impostors_per_pair: 1,
            k: 3,
            classifier: Classifier::Knn,
            seed: 0,
            representatives: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(PipelineConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn filter_bank(&self) -> anyhow::Result<FilterBankConfig> {
        Ok(FilterBankConfig::new(self.bins, self.alpha, self.fmax)?)
    }

    pub fn train(&self) -> anyhow::Result<TrainConfig> {
        let tc = TrainConfig {
            regularizer: self.regularizer,
            max_iterations: self.max_iterations,
            convergence_tol: self.convergence_tol,
            line_search_tol: self.line_search_tol,
            max_step: self.max_step,
            rng_seed: self.seed,
        };
        tc.validate()?;
        if self.impostors_per_pair == 0 {
            bail!("impostors_per_pair must be >= 1");
        }
        Ok(tc)
    }
}

/// `N1..N2`, inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimRange(pub RangeInclusive<usize>);

impl FromStr for DimRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected N1..N2, got '{s}'"))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| format!("'{x}' is not a count"))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if a == 0 || b < a {
            return Err(format!("need 1 <= N1 <= N2, got {a}..{b}"));
        }
        Ok(DimRange(a..=b))
    }
}

/// `euclidean`, `boost` (train on the training set), or a model file path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricArg {
    Euclidean,
    Boost,
    File(std::path::PathBuf),
}

impl FromStr for MetricArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "euclidean" => MetricArg::Euclidean,
            "boost" => MetricArg::Boost,
            "" => return Err("empty metric".into()),
            path => MetricArg::File(path.into()),
        })
    }
}
