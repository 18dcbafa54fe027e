//! Three-axis acceleration traces and their DFT321 magnitude spectrum.
//!
//! The three axes are transformed independently and folded into one magnitude
//! per frequency bin, `|Y(k)| = sqrt(|X(k)|² + |Y(k)|² + |Z(k)|²)`, which keeps
//! the per-bin energy of the original signal. Only the magnitude is produced;
//! downstream features consume `|Y|²` exclusively.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// A raw 3-axis acceleration recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<[f64; 3]>,
    sample_rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<[f64; 3]>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::invalid(format!(
                "signal needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if let Some(idx) = samples
            .iter()
            .position(|s| s.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFinite(format!("sample {idx}")));
        }
        Ok(Signal {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate / 2.0
    }

    /// One axis as a contiguous vector.
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[axis]).collect()
    }
}

/// A single combined magnitude spectrum over `[0, f_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    magnitudes: Vec<f64>,
    freq_resolution: f64,
    f_max: f64,
}

impl Spectrum {
    /// Builds a spectrum, checking that the bin count agrees with
    /// `floor(f_max / freq_resolution) + 1`.
    pub fn new(magnitudes: Vec<f64>, freq_resolution: f64, f_max: f64) -> Result<Self> {
        if !(freq_resolution.is_finite() && freq_resolution > 0.0) {
            return Err(Error::invalid(format!(
                "frequency resolution must be positive, got {freq_resolution}"
            )));
        }
        if !(f_max.is_finite() && f_max >= 0.0) {
            return Err(Error::invalid(format!("invalid f_max {f_max}")));
        }
        if let Some(k) = magnitudes.iter().position(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::invalid(format!(
                "magnitude at bin {k} is negative or non-finite"
            )));
        }
        let expected = bin_count(f_max, freq_resolution);
        if magnitudes.len() != expected {
            return Err(Error::invalid(format!(
                "spectrum has {} bins but f_max={f_max} at resolution {freq_resolution} needs {expected}",
                magnitudes.len()
            )));
        }
        Ok(Spectrum {
            magnitudes,
            freq_resolution,
            f_max,
        })
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn freq_resolution(&self) -> f64 {
        self.freq_resolution
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.freq_resolution
    }

    /// Squared magnitudes, `|Y(w)|²`.
    pub fn power(&self) -> impl Iterator<Item = f64> + '_ {
        self.magnitudes.iter().map(|m| m * m)
    }

    pub fn energy(&self) -> f64 {
        self.power().sum()
    }
}

/// Number of bins on `[0, f_max]` at the given resolution. The small relative
/// slack absorbs rounding in `f_max / freq_resolution` for exact multiples.
pub(crate) fn bin_count(f_max: f64, freq_resolution: f64) -> usize {
    let ratio = f_max / freq_resolution;
    (ratio + ratio.abs() * 1e-12 + 1e-12).floor() as usize + 1
}

/// Taper applied to each axis before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    fn coefficients(self, n: usize) -> Option<Vec<f64>> {
        match self {
            Window::Rectangular => None,
            Window::Hann => Some(
                (0..n)
                    .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
                    .collect(),
            ),
        }
    }
}

/// DFT321 magnitude over `[0, Nyquist]` with no window.
pub fn dft321_magnitude(signal: &Signal) -> Spectrum {
    dft321_magnitude_windowed(signal, Window::Rectangular)
}

pub fn dft321_magnitude_windowed(signal: &Signal, window: Window) -> Spectrum {
    let n = signal.len();
    let half = n / 2 + 1;
    let taper = window.coefficients(n);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);

    let mut power = vec![0.0f64; half];
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for axis in 0..3 {
        for (i, (slot, s)) in buf.iter_mut().zip(signal.samples()).enumerate() {
            let w = taper.as_ref().map_or(1.0, |t| t[i]);
            *slot = Complex::new(s[axis] * w, 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf[..half]) {
            *p += c.norm_sqr();
        }
    }

    let freq_resolution = signal.sample_rate() / n as f64;
    Spectrum {
        magnitudes: power.into_iter().map(f64::sqrt).collect(),
        freq_resolution,
        f_max: signal.nyquist(),
    }
}

/// Keeps the bins with frequency `<= f_max`.
pub fn truncate_spectrum(spectrum: &Spectrum, f_max: f64) -> Result<Spectrum> {
    if !(f_max.is_finite() && f_max > 0.0) {
        return Err(Error::invalid(format!(
            "f_max must be positive, got {f_max}"
        )));
    }
    if f_max > spectrum.f_max * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "f_max {f_max} Hz exceeds the spectrum limit {} Hz",
            spectrum.f_max
        )));
    }
    let keep = bin_count(f_max, spectrum.freq_resolution).min(spectrum.len());
    Ok(Spectrum {
        magnitudes: spectrum.magnitudes[..keep].to_vec(),
        freq_resolution: spectrum.freq_resolution,
        f_max,
    })
}
