//! Recording, feature and model files, plus a seeded synthetic corpus.
//!
//! Recording file (one per sample, `root/<class>/<sample>.csv`):
//!
//! ```text
//! # sample_rate_hz=10000
//! 0.125,-0.5,0.0
//! ...
//! ```
//!
//! Feature CSV: header `label,a1,...,aN`, one row per sample.
//!
//! Model file:
//!
//! ```text
//! dim=N
//! terms=K
//! w;z1,...,zN          (K lines)
//! m11,...,m1N          (N lines, dense matrix row-major)
//! loss_history=l0,l1,...
//! regularizer=v        (optional trailer)
//! max_iterations=T     (optional trailer)
//! ```
//!
//! The synthetic generator uses `Xoshiro256PlusPlus` (xoshiro family,
//! 256-bit state) seeded through `seed_from_u64`, with per-sample streams
//! derived by SplitMix64 from `(rng_seed, class, sample)`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Deserialize;

use crate::boost::{MahalanobisModel, RankOneTerm, TrainingInfo};
use crate::cqfb::FeatureVector;
use crate::error::{Error, Result};
use crate::signal::Signal;

const RATE_KEY: &str = "# sample_rate_hz=";

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Path(PathBuf),
    Synthetic { rng_seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    entries: Vec<(String, Signal)>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(entries: Vec<(String, Signal)>, provenance: Provenance) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("dataset has no entries"));
        }
        if entries.iter().any(|(l, _)| l.is_empty()) {
            return Err(Error::invalid("dataset contains an empty class label"));
        }
        Ok(Dataset {
            entries,
            provenance,
        })
    }

    pub fn entries(&self) -> &[(String, Signal)] {
        &self.entries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct labels in sorted order.
    pub fn classes(&self) -> Vec<&str> {
        let mut c: Vec<&str> = self.entries.iter().map(|(l, _)| l.as_str()).collect();
        c.sort_unstable();
        c.dedup();
        c
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed write never leaves a partial file at `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("'{}' is not a number", field.trim())))?;
    if !v.is_finite() {
        return Err(Error::parse(
            path,
            line,
            format!("non-finite value '{}'", field.trim()),
        ));
    }
    Ok(v)
}

pub fn parse_recording(path: &Path, text: &str) -> Result<Signal> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file; expected sample-rate header"))?;
    let rate = header
        .trim()
        .strip_prefix(RATE_KEY)
        .ok_or_else(|| Error::parse(path, 1, format!("missing '{RATE_KEY}<float>' header")))?;
    let rate = parse_f64(path, 1, rate)?;

    let mut samples = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 3 comma-separated values, got {}", fields.len()),
            ));
        }
        samples.push([
            parse_f64(path, line_no, fields[0])?,
            parse_f64(path, line_no, fields[1])?,
            parse_f64(path, line_no, fields[2])?,
        ]);
    }
    Signal::new(samples, rate).map_err(|e| Error::parse(path, 1, e.to_string()))
}

pub fn read_recording(path: &Path) -> Result<Signal> {
    parse_recording(path, &read_to_string(path)?)
}

pub fn format_recording(signal: &Signal) -> String {
    let mut out = format!("{RATE_KEY}{}\n", signal.sample_rate());
    for s in signal.samples() {
        let _ = writeln!(out, "{},{},{}", s[0], s[1], s[2]);
    }
    out
}

fn sorted_children(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

/// Loads `root/<class>/<sample>.csv`; entries are ordered by class directory
/// name, then file name.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let mut entries = Vec::new();
    for class_dir in sorted_children(root)? {
        if !class_dir.is_dir() {
            continue;
        }
        let label = class_dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| {
                Error::invalid(format!("non-UTF-8 class directory {}", class_dir.display()))
            })?
            .to_string();
        for file in sorted_children(&class_dir)? {
            if file.extension().and_then(|e| e.to_str()) != Some("csv") {
                continue;
            }
            entries.push((label.clone(), read_recording(&file)?));
        }
    }
    if entries.is_empty() {
        return Err(Error::invalid(format!(
            "no recordings found under {}",
            root.display()
        )));
    }
    Dataset::new(entries, Provenance::Path(root.to_path_buf()))
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty()
        || label.contains([',', '\n', '\r', '/', '\\'])
        || label == "."
        || label == ".."
    {
        return Err(Error::invalid(format!(
            "label '{label}' cannot be written to disk"
        )));
    }
    Ok(())
}

/// Writes each entry to `root/<label>/<index-within-class>.csv`.
pub fn save_dataset(dataset: &Dataset, root: &Path) -> Result<()> {
    let mut counters = std::collections::BTreeMap::<&str, usize>::new();
    for (label, signal) in dataset.entries() {
        check_label(label)?;
        let n = counters.entry(label).or_insert(0);
        let path = root.join(label).join(format!("{:04}.csv", *n));
        *n += 1;
        write_atomic(&path, &format_recording(signal))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// feature CSV

pub fn format_features(features: &[FeatureVector]) -> Result<String> {
    let dim = features.first().map_or(0, FeatureVector::dim);
    let mut out = String::from("label");
    for j in 1..=dim {
        let _ = write!(out, ",a{j}");
    }
    out.push('\n');
    for f in features {
        crate::error::check_dims(dim, f.dim())?;
        let label = f.label().unwrap_or("");
        if label.contains([',', '\n', '\r']) {
            return Err(Error::invalid(format!(
                "label '{label}' cannot be written to CSV"
            )));
        }
        out.push_str(label);
        for v in f.values() {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_features(path: &Path, features: &[FeatureVector]) -> Result<()> {
    write_atomic(path, &format_features(features)?)
}

pub fn parse_features(path: &Path, text: &str) -> Result<Vec<FeatureVector>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty feature file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first().map(|c| c.trim()) != Some("label") {
        return Err(Error::parse(path, 1, "header must start with 'label'"));
    }
    let dim = cols.len() - 1;
    for (j, c) in cols.iter().enumerate().skip(1) {
        if c.trim() != format!("a{j}") {
            return Err(Error::parse(
                path,
                1,
                format!("expected column a{j}, found '{c}'"),
            ));
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {} fields, got {}", dim + 1, fields.len()),
            ));
        }
        let values = fields[1..]
            .iter()
            .map(|f| parse_f64(path, i + 1, f))
            .collect::<Result<Vec<f64>>>()?;
        let label = Some(fields[0].trim().to_string()).filter(|l| !l.is_empty());
        out.push(
            FeatureVector::transformed(values, label)
                .map_err(|e| Error::parse(path, i + 1, e.to_string()))?,
        );
    }
    Ok(out)
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureVector>> {
    parse_features(path, &read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// model file

fn join_floats(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn format_model(model: &MahalanobisModel) -> String {
    let n = model.dim();
    let mut out = format!("dim={n}\nterms={}\n", model.terms().len());
    for t in model.terms() {
        let _ = writeln!(
            out,
            "{:.16e};{}",
            t.weight,
            join_floats(t.direction.iter().copied())
        );
    }
    let m = model.matrix();
    for r in 0..n {
        let _ = writeln!(out, "{}", join_floats((0..n).map(|c| m[(r, c)])));
    }
    let _ = writeln!(
        out,
        "loss_history={}",
        join_floats(model.loss_history().iter().copied())
    );
    if let Some(info) = model.training_info() {
        let _ = writeln!(out, "regularizer={:e}", info.regularizer);
        let _ = writeln!(out, "max_iterations={}", info.max_iterations);
    }
    out
}

pub fn write_model(path: &Path, model: &MahalanobisModel) -> Result<()> {
    write_atomic(path, &format_model(model))
}

pub fn parse_model(path: &Path, text: &str) -> Result<MahalanobisModel> {
    let lines: Vec<&str> = text.lines().collect();
    let mut cursor = 0usize;
    let mut next = |what: &str| -> Result<(usize, &str)> {
        let line = lines.get(cursor).ok_or_else(|| {
            Error::parse(
                path,
                cursor + 1,
                format!("unexpected end of file, expected {what}"),
            )
        })?;
        cursor += 1;
        Ok((cursor, *line))
    };
    let key_usize = |(no, line): (usize, &str), key: &str| -> Result<usize> {
        line.strip_prefix(key)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, no, format!("expected '{key}<integer>'")))
    };
    let floats = |no: usize, s: &str| -> Result<Vec<f64>> {
        if s.trim().is_empty() {
            return Ok(Vec::new());
        }
        s.split(',').map(|f| parse_f64(path, no, f)).collect()
    };

    let dim = key_usize(next("dim")?, "dim=")?;
    let n_terms = key_usize(next("terms")?, "terms=")?;
    let mut terms = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let (no, line) = next("term")?;
        let (w, z) = line
            .split_once(';')
            .ok_or_else(|| Error::parse(path, no, "expected 'w;z1,...,zN'"))?;
        let direction = floats(no, z)?;
        if direction.len() != dim {
            return Err(Error::parse(
                path,
                no,
                format!("term has {} components, expected {dim}", direction.len()),
            ));
        }
        terms.push(RankOneTerm {
            weight: parse_f64(path, no, w)?,
            direction,
        });
    }
    let mut dense = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        let (no, line) = next("matrix row")?;
        let row = floats(no, line)?;
        if row.len() != dim {
            return Err(Error::parse(
                path,
                no,
                format!("matrix row has {} entries, expected {dim}", row.len()),
            ));
        }
        for (c, v) in row.into_iter().enumerate() {
            dense[(r, c)] = v;
        }
    }
    let (no, line) = next("loss_history")?;
    let history = line
        .strip_prefix("loss_history=")
        .ok_or_else(|| Error::parse(path, no, "expected 'loss_history='"))?;
    let history = floats(no, history)?;

    let mut regularizer = None;
    let mut max_iterations = None;
    while let Ok((no, line)) = next("trailer") {
        if line.trim().is_empty() {
            continue;
        }
        if let Some(v) = line.strip_prefix("regularizer=") {
            regularizer = Some(parse_f64(path, no, v)?);
        } else if line.starts_with("max_iterations=") {
            max_iterations = Some(key_usize((no, line), "max_iterations=")?);
        } else {
            return Err(Error::parse(path, no, format!("unexpected line '{line}'")));
        }
    }

    let model = MahalanobisModel::from_terms(dim, terms)
        .map_err(|e| Error::parse(path, 3, e.to_string()))?;
    let scale = model.trace().max(1.0);
    let drift = (model.matrix() - &dense).abs().max();
    if drift > 1e-9 * scale {
        return Err(Error::parse(
            path,
            3 + n_terms,
            format!("dense matrix disagrees with the terms (max deviation {drift:e})"),
        ));
    }
    let mut model = model.with_dense(dense)?.with_loss_history(history);
    if let (Some(regularizer), Some(max_iterations)) = (regularizer, max_iterations) {
        model = model.with_training_info(TrainingInfo {
            regularizer,
            max_iterations,
        });
    }
    Ok(model)
}

pub fn read_model(path: &Path) -> Result<MahalanobisModel> {
    parse_model(path, &read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// synthetic corpus

/// One noise band of a class envelope.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub center: f64,
    pub width: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassEnvelope {
    pub bands: Vec<Band>,
}

/// Parameters of the synthetic corpus.
///
/// When `classes` is empty, envelopes are generated from `envelope_seed`:
/// class `c` gets a primary band centered at
/// `lo · (hi / lo)^(c / (n_classes - 1))` plus `bands_per_class - 1`
/// log-uniform secondary bands, each `relative_width · center` wide.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub samples_per_class: usize,
    pub sample_rate: f64,
    pub duration: f64,
    /// Seeds the per-sample noise.
    pub rng_seed: u64,
    /// Seeds the generated class envelopes; keep it fixed to draw a second,
    /// independently "recorded" set of the same classes.
    pub envelope_seed: u64,
    pub band_range: [f64; 2],
    pub bands_per_class: usize,
    pub relative_width: f64,
    /// Each band gain is scaled by `1 + gain_jitter · U(-1, 1)` per sample.
    pub gain_jitter: f64,
    /// Peak gain of a class-independent band around `nuisance_center` whose
    /// level is drawn as `U(0, nuisance_gain)` per sample.
    pub nuisance_gain: f64,
    pub nuisance_center: f64,
    /// Standard deviation of independent white noise added to each axis.
    pub noise_floor: f64,
    pub classes: Vec<ClassEnvelope>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_classes: 10,
            samples_per_class: 10,
            sample_rate: 10_000.0,
            duration: 1.0,
            rng_seed: 1,
            envelope_seed: 7,
            band_range: [10.0, 900.0],
            bands_per_class: 2,
            relative_width: 0.15,
            gain_jitter: 0.3,
            nuisance_gain: 2.0,
            nuisance_center: 700.0,
            noise_floor: 0.01,
            classes: Vec::new(),
        }
    }
}

impl SynthSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SynthSpec =
            toml::from_str(text).map_err(|e| Error::invalid(format!("synthesis spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        SynthSpec::from_toml(&text).map_err(|e| Error::parse(path, 1, e.to_string()))
    }

    pub fn n_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes == 0 || self.samples_per_class == 0 {
            return Err(Error::invalid(
                "n_classes and samples_per_class must be >= 1",
            ));
        }
        if !(self.sample_rate.is_finite()
            && self.sample_rate > 0.0
            && self.duration.is_finite()
            && self.duration > 0.0)
        {
            return Err(Error::invalid("sample_rate and duration must be positive"));
        }
        if self.n_samples() < 64 {
            return Err(Error::invalid(format!(
                "duration x sample_rate must give at least 64 samples, got {}",
                self.n_samples()
            )));
        }
        let [lo, hi] = self.band_range;
        if !(lo > 0.0 && hi >= lo && hi <= self.sample_rate / 2.0) {
            return Err(Error::invalid(format!(
                "band_range [{lo}, {hi}] must satisfy 0 < lo <= hi <= Nyquist"
            )));
        }
        if self.bands_per_class == 0 && self.classes.is_empty() {
            return Err(Error::invalid("bands_per_class must be >= 1"));
        }
        for (name, v) in [
            ("relative_width", self.relative_width),
            ("gain_jitter", self.gain_jitter),
            ("nuisance_gain", self.nuisance_gain),
            ("nuisance_center", self.nuisance_center),
            ("noise_floor", self.noise_floor),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.relative_width == 0.0 {
            return Err(Error::invalid("relative_width must be positive"));
        }
        if self.gain_jitter >= 1.0 {
            return Err(Error::invalid("gain_jitter must be < 1"));
        }
        if !self.classes.is_empty() {
            if self.classes.len() != self.n_classes {
                return Err(Error::invalid(format!(
                    "{} class envelopes given for n_classes = {}",
                    self.classes.len(),
                    self.n_classes
                )));
            }
            for b in self.classes.iter().flat_map(|c| &c.bands) {
                if !(b.center >= 0.0
                    && b.width > 0.0
                    && b.gain >= 0.0
                    && b.center.is_finite()
                    && b.width.is_finite()
                    && b.gain.is_finite())
                {
                    return Err(Error::invalid(format!("invalid band {b:?}")));
                }
            }
        }
        Ok(())
    }

    /// The envelope of every class, generated or explicit.
    pub fn envelopes(&self) -> Vec<ClassEnvelope> {
        if !self.classes.is_empty() {
            return self.classes.clone();
        }
        let [lo, hi] = self.band_range;
        let ratio = hi / lo;
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(self.envelope_seed);
        (0..self.n_classes)
            .map(|c| {
                let pos = if self.n_classes > 1 {
                    c as f64 / (self.n_classes - 1) as f64
                } else {
                    0.0
                };
                let mut centers = vec![lo * ratio.powf(pos)];
                let mut gains = vec![1.0];
                for _ in 1..self.bands_per_class {
                    centers.push(lo * ratio.powf(rng.random::<f64>()));
                    gains.push(rng.random_range(0.3..1.0));
                }
                ClassEnvelope {
                    bands: centers
                        .into_iter()
                        .zip(gains)
                        .map(|(center, gain)| Band {
                            center,
                            width: self.relative_width * center,
                            gain,
                        })
                        .collect(),
                }
            })
            .collect()
    }
}

fn class_label(c: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(2);
    format!("class_{c:0width$}")
}

/// SplitMix64 finalizer, used to derive independent per-sample seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Amplitude response at `f` of a set of bands, each with unit-peak Gaussian
/// shape scaled by `gain / sqrt(width)` so a band's power is proportional to
/// `gain²` whatever its width.
fn envelope_amplitude(bands: &[(Band, f64)], f: f64) -> f64 {
    bands
        .iter()
        .map(|(b, g)| {
            let d = f - b.center;
            g / b.width.sqrt() * (-(d * d) / (2.0 * b.width * b.width)).exp()
        })
        .sum()
}

/// Generates `samples_per_class` recordings per class: white noise shaped by
/// the class envelope (with per-sample gain jitter and a random-level
/// nuisance band), spread over the three axes by a random unit mixing vector,
/// plus independent per-axis white noise.
pub fn synth_corpus(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n_samples();
    let fs = spec.sample_rate;
    let envelopes = spec.envelopes();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let nuisance = Band {
        center: spec.nuisance_center,
        width: spec.relative_width.max(0.15) * spec.nuisance_center.max(1.0),
        gain: 1.0,
    };

    let mut entries = Vec::with_capacity(spec.n_classes * spec.samples_per_class);
    for (c, env) in envelopes.iter().enumerate() {
        let label = class_label(c, spec.n_classes);
        for s in 0..spec.samples_per_class {
            let stream = splitmix64(spec.rng_seed ^ splitmix64(((c as u64) << 32) | s as u64));
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(stream);

            let mut bands: Vec<(Band, f64)> = env
                .bands
                .iter()
                .map(|b| {
                    (
                        *b,
                        b.gain * (1.0 + spec.gain_jitter * rng.random_range(-1.0..=1.0)),
                    )
                })
                .collect();
            if spec.nuisance_gain > 0.0 {
                bands.push((nuisance, rng.random_range(0.0..=spec.nuisance_gain)));
            }

            let mut buf: Vec<Complex<f64>> = (0..n)
                .map(|_| Complex::new(rng.sample::<f64, _>(StandardNormal), 0.0))
                .collect();
            forward.process(&mut buf);
            for (k, v) in buf.iter_mut().enumerate() {
                let bin = k.min(n - k);
                *v *= envelope_amplitude(&bands, bin as f64 * fs / n as f64);
            }
            inverse.process(&mut buf);
            // rustfft leaves the inverse unnormalized; sqrt(n) keeps unit-variance
            // white noise at unit variance under a flat envelope
            let scale = 1.0 / (n as f64).sqrt();

            let mix: [f64; 3] = {
                let v: [f64; 3] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-12);
                v.map(|x| x / norm)
            };
            let samples = buf
                .iter()
                .map(|z| {
                    let x = z.re * scale;
                    std::array::from_fn(|a| {
                        mix[a] * x + spec.noise_floor * rng.sample::<f64, _>(StandardNormal)
                    })
                })
                .collect();
            entries.push((label.clone(), Signal::new(samples, fs)?));
        }
    }
    Dataset::new(
        entries,
        Provenance::Synthetic {
            rng_seed: spec.rng_seed,
        },
    )
}
