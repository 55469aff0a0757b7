//! Quantitative evaluation: projection SDR, synthetic speech/noise
//! generation, and the experiment runner.

mod experiment;
mod sdr;
mod synth;

pub use experiment::{run_experiment, EnhancerKind, SdrReport, UtteranceRow};
pub use sdr::sdr;
pub use synth::{mix_at_snr, synth_noise, synth_speech, NoiseType, SynthConfig};

use ndarray::ArrayView2;
use thiserror::Error;

use crate::enhance::EnhanceError;
use crate::signal::SignalError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Enhance(#[from] EnhanceError),
    #[error("buffers have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("reference signal is all zeros")]
    ZeroReference,
    #[error("{0} signal has zero power")]
    ZeroPower(&'static str),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// Itakura-Saito divergence sum_ij (p/q - ln(p/q) - 1) with both arguments
/// floored at a small fraction of their joint mean so zero bins stay finite.
pub fn itakura_saito_divergence(p: ArrayView2<f64>, q: ArrayView2<f64>) -> f64 {
    assert_eq!(p.dim(), q.dim());
    let scale = 0.5 * (p.mean().unwrap_or(0.0) + q.mean().unwrap_or(0.0));
    let floor = (scale * 1e-12).max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    ndarray::Zip::from(&p).and(&q).for_each(|&pv, &qv| {
        let ratio = pv.max(floor) / qv.max(floor);
        total += ratio - ratio.ln() - 1.0;
    });
    total
}
