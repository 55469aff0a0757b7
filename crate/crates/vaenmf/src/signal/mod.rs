//! Audio ingestion/emission and the STFT analysis/synthesis layer shared by
//! training and inference.

mod stft;
mod wav;

pub use stft::{istft, stft};
pub use wav::{read_wav, write_wav};

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported WAV format: {0}")]
    Format(String),
    #[error("expected mono audio, file has {0} channels")]
    Channels(u16),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("invalid sample rate {0}")]
    SampleRate(u32),
    #[error("buffer too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("invalid STFT config: {0}")]
    Config(String),
    #[error("spectrogram metadata (window {win}, hop {hop}) does not match config (window {cfg_win}, hop {cfg_hop})")]
    ConfigMismatch {
        win: usize,
        hop: usize,
        cfg_win: usize,
        cfg_hop: usize,
    },
}

/// A mono time-domain signal with amplitudes in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl SampleBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, SignalError> {
        if sample_rate == 0 {
            return Err(SignalError::SampleRate(sample_rate));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(SignalError::NonFinite(i));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Analysis/synthesis parameters. The window is periodic Hann; `hop` must
/// divide the overlap so that the squared-window overlap-add stays bounded
/// away from zero (checked in `validate`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct StftConfig {
    pub window_len: usize,
    pub hop: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_len: 1024,
            hop: 256,
        }
    }
}

impl StftConfig {
    /// Number of frequency bins produced by `stft`.
    pub fn freq_bins(&self) -> usize {
        self.window_len / 2 + 1
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if self.window_len == 0 || self.hop == 0 {
            return Err(SignalError::Config(
                "window_len and hop must be positive".into(),
            ));
        }
        if self.hop > self.window_len {
            return Err(SignalError::Config(format!(
                "hop {} exceeds window_len {}",
                self.hop, self.window_len
            )));
        }
        if self.window_len % 2 != 0 {
            return Err(SignalError::Config("window_len must be even".into()));
        }
        // Reconstruction divides by the squared-window overlap-add; require it
        // to stay above a floor over one hop period in the interior.
        let w = hann_window(self.window_len);
        let mut min_sum = f64::INFINITY;
        for n in 0..self.hop {
            let mut sum = 0.0;
            let mut idx = n;
            while idx < self.window_len {
                sum += w[idx] * w[idx];
                idx += self.hop;
            }
            min_sum = min_sum.min(sum);
        }
        if min_sum < 1e-3 {
            return Err(SignalError::Config(format!(
                "window/hop pair is not invertible (min overlap-add {min_sum:.2e})"
            )));
        }
        Ok(())
    }
}

/// Periodic Hann window of length `n`.
pub(crate) fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / n as f64).cos()))
        .collect()
}

/// One-sided complex STFT matrix (F = window_len/2 + 1 rows, one column per
/// frame) with the analysis parameters it was produced under.
#[derive(Debug, Clone)]
pub struct ComplexSpectrogram {
    pub bins: Array2<Complex64>,
    pub window_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
    /// Length of the signal the spectrogram was computed from, so that
    /// synthesis can trim the centering pad.
    pub signal_len: usize,
}

impl ComplexSpectrogram {
    pub fn freq_bins(&self) -> usize {
        self.bins.nrows()
    }

    pub fn frames(&self) -> usize {
        self.bins.ncols()
    }
}

/// Elementwise squared magnitudes of a complex spectrogram.
#[derive(Debug, Clone)]
pub struct PowerSpectrogram {
    pub values: Array2<f64>,
}

impl PowerSpectrogram {
    pub fn freq_bins(&self) -> usize {
        self.values.nrows()
    }

    pub fn frames(&self) -> usize {
        self.values.ncols()
    }
}

pub fn power_spectrogram(spec: &ComplexSpectrogram) -> PowerSpectrogram {
    PowerSpectrogram {
        values: spec.bins.mapv(|c| c.norm_sqr()),
    }
}
