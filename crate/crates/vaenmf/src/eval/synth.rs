//! Desk-scale synthetic corpus: a harmonic speech surrogate with
//! time-varying pitch and formant-like envelopes, plus three noise families
//! whose power spectrograms are low-rank by construction.

use std::f64::consts::TAU;

use ndarray::Array1;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::signal::{istft, stft, SampleBuffer, StftConfig};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseType {
    LowRankStationary,
    Hum,
    FilteredNoise,
}

impl std::fmt::Display for NoiseType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseType::LowRankStationary => "low-rank-stationary",
            NoiseType::Hum => "hum",
            NoiseType::FilteredNoise => "filtered-noise",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub utterance_count: usize,
    pub duration_s: f64,
    pub snr_db: f64,
    pub harmonic_count: usize,
    pub f0_min: f64,
    pub f0_max: f64,
    /// Width (Hz) of the formant-like resonances shaping the harmonics.
    pub envelope_bandwidth: f64,
    pub noise_type: NoiseType,
    pub seed: u64,
    pub sample_rate: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            utterance_count: 20,
            duration_s: 2.0,
            snr_db: 5.0,
            harmonic_count: 12,
            f0_min: 100.0,
            f0_max: 250.0,
            envelope_bandwidth: 500.0,
            noise_type: NoiseType::LowRankStationary,
            seed: 0,
            sample_rate: 16_000,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.utterance_count == 0 || self.harmonic_count == 0 {
            return Err(EvalError::InvalidConfig(
                "utterance_count and harmonic_count must be positive".into(),
            ));
        }
        if !(self.duration_s > 0.0) || self.sample_rate == 0 {
            return Err(EvalError::InvalidConfig(
                "duration and sample rate must be positive".into(),
            ));
        }
        if !self.snr_db.is_finite() {
            return Err(EvalError::InvalidConfig("SNR must be finite".into()));
        }
        if !(0.0 < self.f0_min && self.f0_min < self.f0_max) {
            return Err(EvalError::InvalidConfig("f0 range must be ordered".into()));
        }
        if !(self.envelope_bandwidth > 0.0) {
            return Err(EvalError::InvalidConfig(
                "envelope bandwidth must be positive".into(),
            ));
        }
        Ok(())
    }

    fn num_samples(&self) -> usize {
        (self.duration_s * self.sample_rate as f64).round() as usize
    }
}

/// A voiced, amplitude-modulated harmonic stack with slowly drifting pitch
/// and a random formant-like spectral envelope. Never silent: the amplitude
/// modulation is floored well above zero.
pub fn synth_speech<R: Rng>(config: &SynthConfig, rng: &mut R) -> Result<SampleBuffer, EvalError> {
    config.validate()?;
    let fs = config.sample_rate as f64;
    let n = config.num_samples();

    let f0_center = rng.gen_range(config.f0_min..config.f0_max);
    let vibrato_rate = rng.gen_range(0.8..2.5);
    let vibrato_phase = rng.gen_range(0.0..TAU);
    let vibrato_depth = 0.03;
    let am_rate = rng.gen_range(1.5..4.0);
    let am_phase = rng.gen_range(0.0..TAU);

    // Formant-like envelope: three Gaussian resonances over a small base.
    let centers: Vec<f64> = (0..3).map(|_| rng.gen_range(300.0..3200.0)).collect();
    let gains: Vec<f64> = (0..3).map(|_| rng.gen_range(0.4..1.0)).collect();
    let bw = config.envelope_bandwidth;
    let envelope = |freq: f64| -> f64 {
        let mut e = 0.08;
        for (c, g) in centers.iter().zip(&gains) {
            e += g * (-(freq - c).powi(2) / (2.0 * bw * bw)).exp();
        }
        e
    };

    // Keep every harmonic safely below Nyquist, vibrato included.
    let max_harmonics = ((0.45 * fs) / config.f0_max).floor() as usize;
    let harmonics = config.harmonic_count.min(max_harmonics).max(1);
    let amps: Vec<f64> = (1..=harmonics)
        .map(|j| envelope(j as f64 * f0_center) / (j as f64).sqrt())
        .collect();
    let phases: Vec<f64> = (0..harmonics).map(|_| rng.gen_range(0.0..TAU)).collect();

    let mut samples = Vec::with_capacity(n);
    let mut theta = 0.0f64;
    for i in 0..n {
        let t = i as f64 / fs;
        let f0 = f0_center * (1.0 + vibrato_depth * (TAU * vibrato_rate * t + vibrato_phase).sin());
        theta += TAU * f0 / fs;
        let am = 0.35 + 0.65 * (0.5 + 0.5 * (TAU * am_rate * t + am_phase).sin());
        let mut v = 0.0;
        for (j, (a, p)) in amps.iter().zip(&phases).enumerate() {
            v += a * ((j as f64 + 1.0) * theta + p).sin();
        }
        samples.push(am * v);
    }
    normalize(&mut samples);
    Ok(SampleBuffer::new(samples, config.sample_rate)?)
}

/// Noise whose power spectrogram is low-rank by construction:
/// a mixture of a few slowly gain-modulated stationary shaped-noise
/// components, a harmonic hum over a faint floor, or a single stationary
/// filtered-noise component.
pub fn synth_noise<R: Rng>(config: &SynthConfig, rng: &mut R) -> Result<SampleBuffer, EvalError> {
    config.validate()?;
    let fs = config.sample_rate as f64;
    let n = config.num_samples();

    let mut samples = vec![0.0f64; n];
    match config.noise_type {
        NoiseType::LowRankStationary => {
            for _ in 0..3 {
                let component = shaped_noise(config, rng)?;
                let rate = rng.gen_range(0.3..1.2);
                let phase = rng.gen_range(0.0..TAU);
                for (i, (s, c)) in samples.iter_mut().zip(component.samples()).enumerate() {
                    let t = i as f64 / fs;
                    let gain = 0.6 + 0.4 * (TAU * rate * t + phase).sin();
                    *s += gain * c;
                }
            }
        }
        NoiseType::FilteredNoise => {
            let component = shaped_noise(config, rng)?;
            samples.copy_from_slice(component.samples());
        }
        NoiseType::Hum => {
            let base = 50.0;
            let lines = 6;
            let phases: Vec<f64> = (0..lines).map(|_| rng.gen_range(0.0..TAU)).collect();
            for (i, s) in samples.iter_mut().enumerate() {
                let t = i as f64 / fs;
                let mut v = 0.0;
                for (j, p) in phases.iter().enumerate() {
                    let k = (j + 1) as f64;
                    v += (TAU * base * k * t + p).sin() / k;
                }
                // Faint broadband floor keeps the spectrum nondegenerate.
                *s = v + 0.02 * rng.gen_range(-1.0..1.0);
            }
        }
    }
    normalize(&mut samples);
    Ok(SampleBuffer::new(samples, config.sample_rate)?)
}

// White noise filtered to a random smooth spectral shape via one STFT pass.
fn shaped_noise<R: Rng>(config: &SynthConfig, rng: &mut R) -> Result<SampleBuffer, EvalError> {
    let n = config.num_samples();
    let white: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let stft_cfg = StftConfig::default();
    if n < stft_cfg.window_len {
        return Err(EvalError::InvalidConfig(format!(
            "duration too short for shaping ({n} samples)"
        )));
    }
    let buf = SampleBuffer::new(white, config.sample_rate)?;
    let mut spec = stft(&buf, &stft_cfg)?;
    let bins = spec.freq_bins();
    let fs = config.sample_rate as f64;

    // Smooth random log-amplitude shape: a downward tilt plus a few broad
    // cosine ripples.
    let tilt = rng.gen_range(-18.0..-6.0);
    let ripples: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(3.0..10.0),
                rng.gen_range(0.0..TAU),
                rng.gen_range(1.0..4.0),
            )
        })
        .collect();
    let shape: Array1<f64> = (0..bins)
        .map(|f| {
            let x = f as f64 / bins as f64;
            let freq = f as f64 * fs / stft_cfg.window_len as f64;
            let mut db = tilt * x;
            for (period, phase, depth) in &ripples {
                db += depth * (period * x * TAU + phase).cos();
            }
            // Roll off the lowest bins so hum-free shapes stay broadband.
            let lowcut = if freq < 60.0 { -20.0 } else { 0.0 };
            10f64.powf((db + lowcut) / 20.0)
        })
        .collect();

    for f in 0..bins {
        for t in 0..spec.frames() {
            spec.bins[[f, t]] *= shape[f];
        }
    }
    Ok(istft(&spec, &stft_cfg)?)
}

fn normalize(samples: &mut [f64]) {
    let rms = (samples.iter().map(|s| s * s).sum::<f64>() / samples.len().max(1) as f64).sqrt();
    if rms > 0.0 {
        let mut scale = 0.1 / rms;
        let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if peak * scale > 0.95 {
            scale = 0.95 / peak;
        }
        for s in samples.iter_mut() {
            *s *= scale;
        }
    }
}

/// Mix speech and noise at an exact SNR: the noise is rescaled so that
/// 10 log10(P_speech / P_noise) equals `snr_db`.
pub fn mix_at_snr(
    speech: &SampleBuffer,
    noise: &SampleBuffer,
    snr_db: f64,
) -> Result<SampleBuffer, EvalError> {
    if speech.len() != noise.len() {
        return Err(EvalError::LengthMismatch(speech.len(), noise.len()));
    }
    if !snr_db.is_finite() {
        return Err(EvalError::InvalidConfig(format!(
            "SNR must be finite, got {snr_db}"
        )));
    }
    let p_s: f64 = speech.samples().iter().map(|v| v * v).sum::<f64>() / speech.len() as f64;
    let p_n: f64 = noise.samples().iter().map(|v| v * v).sum::<f64>() / noise.len() as f64;
    if p_s <= 0.0 {
        return Err(EvalError::ZeroPower("speech"));
    }
    if p_n <= 0.0 {
        return Err(EvalError::ZeroPower("noise"));
    }
    let alpha = (p_s / (p_n * 10f64.powf(snr_db / 10.0))).sqrt();
    let mixed: Vec<f64> = speech
        .samples()
        .iter()
        .zip(noise.samples())
        .map(|(s, n)| s + alpha * n)
        .collect();
    Ok(SampleBuffer::new(mixed, speech.sample_rate())?)
}
