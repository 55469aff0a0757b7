//! End-to-end enhancement: noisy buffer in, enhanced buffer out, via
//! STFT -> posterior inference -> Wiener filter -> ISTFT.

use std::time::{Duration, Instant};

use ndarray::Array2;
use thiserror::Error;

use crate::mcmc::{run_chain, IterationRecord, McmcConfig, McmcError, PriorConfig};
use crate::signal::{istft, stft, ComplexSpectrogram, SampleBuffer, SignalError, StftConfig};
use crate::vae::{VaeError, VaeModel};

#[derive(Debug, Error)]
pub enum EnhanceError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Mcmc(#[from] McmcError),
    #[error(transparent)]
    Vae(#[from] VaeError),
    #[error("non-finite {0} passed to the Wiener filter")]
    NonFinite(&'static str),
    #[error("Wiener filter shapes disagree: {0}")]
    Shape(String),
}

/// Per-run diagnostics from the inference chain.
#[derive(Debug, Clone)]
pub struct EnhanceDiagnostics {
    pub acceptance_rate: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    pub runtime: Duration,
}

/// The enhanced signal, the time-frequency gain that produced it, and chain
/// diagnostics.
#[derive(Debug, Clone)]
pub struct EnhanceResult {
    pub enhanced: SampleBuffer,
    pub wiener_mask: Array2<f64>,
    pub diagnostics: EnhanceDiagnostics,
}

/// Apply the Wiener gain sigma_s / (sigma_s + noise_psd) to each bin of the
/// mixture. The mask lies in (0, 1] whenever `speech_psd` is strictly
/// positive, and the mixture phase is untouched.
pub fn wiener_filter(
    mixture: &ComplexSpectrogram,
    speech_psd: &Array2<f64>,
    noise_psd: &Array2<f64>,
) -> Result<(ComplexSpectrogram, Array2<f64>), EnhanceError> {
    let dim = mixture.bins.dim();
    if speech_psd.dim() != dim || noise_psd.dim() != dim {
        return Err(EnhanceError::Shape(format!(
            "mixture {:?}, speech {:?}, noise {:?}",
            dim,
            speech_psd.dim(),
            noise_psd.dim()
        )));
    }
    if speech_psd.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(EnhanceError::NonFinite("speech PSD"));
    }
    if noise_psd.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(EnhanceError::NonFinite("noise PSD"));
    }

    let mut mask = Array2::zeros(dim);
    ndarray::Zip::from(&mut mask)
        .and(speech_psd)
        .and(noise_psd)
        .for_each(|m, &s, &n| *m = s / (s + n));
    let mut filtered = mixture.clone();
    ndarray::Zip::from(&mut filtered.bins)
        .and(&mask)
        .for_each(|b, &m| *b *= m);
    Ok((filtered, mask))
}

/// Full pipeline on one utterance. Deterministic given `mcmc.seed`.
pub fn enhance(
    noisy: &SampleBuffer,
    model: &VaeModel,
    priors: &PriorConfig,
    mcmc: &McmcConfig,
    stft_config: &StftConfig,
) -> Result<EnhanceResult, EnhanceError> {
    let start = Instant::now();
    if stft_config.freq_bins() != model.freq_bins() {
        return Err(McmcError::ShapeMismatch {
            expected: model.freq_bins(),
            found: stft_config.freq_bins(),
        }
        .into());
    }
    if noisy.sample_rate() != 16_000 {
        log::warn!(
            "input sample rate is {} Hz; the speech prior was trained for 16 kHz material",
            noisy.sample_rate()
        );
    }

    let spectrogram = stft(noisy, stft_config)?;
    let chain = run_chain(&spectrogram, model, priors, mcmc)?;

    let speech_psd = model.decode_batch(chain.summary.mean_latents.view())?;
    let noise_psd = chain
        .summary
        .mean_basis
        .dot(&chain.summary.mean_activations);
    let (filtered, mask) = wiener_filter(&spectrogram, &speech_psd, &noise_psd)?;
    let enhanced = istft(&filtered, stft_config)?;

    Ok(EnhanceResult {
        enhanced,
        wiener_mask: mask,
        diagnostics: EnhanceDiagnostics {
            acceptance_rate: chain.summary.acceptance_rate,
            trace: chain.trace,
            runtime: start.elapsed(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::power_spectrogram;
    use ndarray::Array1;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mixture_spec(seed: u64) -> ComplexSpectrogram {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..4096).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let buf = SampleBuffer::new(samples, 16000).unwrap();
        stft(&buf, &StftConfig::default()).unwrap()
    }

    #[test]
    fn zero_noise_gives_unit_mask() {
        let spec = mixture_spec(1);
        let dim = spec.bins.dim();
        let speech = Array2::from_elem(dim, 0.3);
        let noise = Array2::zeros(dim);
        let (out, mask) = wiener_filter(&spec, &speech, &noise).unwrap();
        assert!(mask.iter().all(|&m| m == 1.0));
        assert_eq!(out.bins, spec.bins);
    }

    #[test]
    fn equal_psds_give_half_mask() {
        let spec = mixture_spec(2);
        let dim = spec.bins.dim();
        let psd = Array2::from_elem(dim, 0.7);
        let (_, mask) = wiener_filter(&spec, &psd, &psd).unwrap();
        assert!(mask.iter().all(|&m| (m - 0.5).abs() < 1e-15));
    }

    #[test]
    fn mask_bounded_magnitude_shrinks_phase_preserved() {
        let spec = mixture_spec(3);
        let dim = spec.bins.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let speech = Array2::from_shape_fn(dim, |_| rng.gen_range(1e-6..2.0));
        let noise = Array2::from_shape_fn(dim, |_| rng.gen_range(0.0..2.0));
        let (out, mask) = wiener_filter(&spec, &speech, &noise).unwrap();
        assert!(mask.iter().all(|&m| m > 0.0 && m <= 1.0));
        for (o, x) in out.bins.iter().zip(spec.bins.iter()) {
            assert!(o.norm() <= x.norm() * (1.0 + 1e-12));
            if x.norm() > 1e-12 {
                let phase_diff = (o.arg() - x.arg()).abs();
                assert!(phase_diff <= 1e-12, "phase changed by {phase_diff}");
            }
        }
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        let spec = mixture_spec(5);
        let dim = spec.bins.dim();
        let mut speech = Array2::from_elem(dim, 1.0);
        let noise = Array2::zeros(dim);
        speech[[0, 0]] = f64::NAN;
        assert!(matches!(
            wiener_filter(&spec, &speech, &noise),
            Err(EnhanceError::NonFinite(_))
        ));
    }

    #[test]
    fn enhance_rejects_model_spectrogram_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let model = VaeModel::new(257, 2, &[4], 1e-6, &mut rng);
        let buf = SampleBuffer::new(vec![0.1; 4096], 16000).unwrap();
        let err = enhance(
            &buf,
            &model,
            &PriorConfig::default(),
            &McmcConfig::default(),
            &StftConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            EnhanceError::Mcmc(McmcError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn enhance_is_seed_deterministic_and_energy_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let model = VaeModel::new(65, 2, &[8], 1e-6, &mut rng);
        let cfg = StftConfig {
            window_len: 128,
            hop: 32,
        };
        let samples: Vec<f64> = (0..2048)
            .map(|n| 0.3 * (std::f64::consts::TAU * 440.0 * n as f64 / 16000.0).sin())
            .collect();
        let buf = SampleBuffer::new(samples, 16000).unwrap();
        let mcmc = McmcConfig {
            burn_in: 3,
            samples: 3,
            seed: 9,
            ..McmcConfig::default()
        };
        let a = enhance(&buf, &model, &PriorConfig::default(), &mcmc, &cfg).unwrap();
        let b = enhance(&buf, &model, &PriorConfig::default(), &mcmc, &cfg).unwrap();
        assert_eq!(a.enhanced.samples(), b.enhanced.samples());
        assert_eq!(a.enhanced.len(), buf.len());

        // Energy cannot grow: the mask never exceeds 1.
        let spec = stft(&buf, &cfg).unwrap();
        let in_spec_energy: f64 = power_spectrogram(&spec).values.sum();
        let out_spec = stft(&a.enhanced, &cfg).unwrap();
        let out_spec_energy: f64 = power_spectrogram(&out_spec).values.sum();
        assert!(out_spec_energy <= in_spec_energy * (1.0 + 1e-6));

        let in_energy: f64 = buf.samples().iter().map(|s| s * s).sum();
        let out_energy: f64 = a.enhanced.samples().iter().map(|s| s * s).sum();
        assert!(out_energy <= in_energy * (1.0 + 1e-6));

        let t = spec.frames();
        assert_eq!(a.diagnostics.acceptance_rate.len(), t);
        assert_eq!(a.diagnostics.trace.len(), 6);
        let _ = Array1::from(a.diagnostics.acceptance_rate.clone());
    }
}
