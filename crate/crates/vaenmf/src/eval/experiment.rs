//! Experiment runner: synthesize mixtures per condition, enhance, score.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::enhance::{enhance, wiener_filter};
use crate::mcmc::{McmcConfig, PriorConfig};
use crate::signal::{istft, stft, SampleBuffer, StftConfig};
use crate::vae::VaeModel;

use super::{mix_at_snr, sdr, synth_noise, synth_speech, EvalError, NoiseType, SynthConfig};

/// Which enhancement path the experiment exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnhancerKind {
    /// Full posterior inference and Wiener filtering.
    VaeNmf,
    /// Control condition: unit mask through the same analysis/synthesis
    /// path, so output SDR should match input SDR.
    Passthrough,
}

#[derive(Debug, Clone)]
pub struct UtteranceRow {
    pub utterance_id: String,
    pub noise_type: NoiseType,
    pub snr_in_db: f64,
    pub sdr_in_db: f64,
    pub sdr_out_db: f64,
    /// Mean Metropolis acceptance rate over frames; absent for the
    /// passthrough control.
    pub acceptance_rate: Option<f64>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct ConditionSummary {
    pub noise_type: NoiseType,
    pub snr_in_db: f64,
    pub mean_sdr_in_db: f64,
    pub mean_sdr_out_db: f64,
    pub mean_acceptance_rate: Option<f64>,
    pub mean_runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct SdrReport {
    pub rows: Vec<UtteranceRow>,
    pub aggregates: Vec<ConditionSummary>,
}

impl SdrReport {
    pub fn mean_improvement(&self, noise_type: NoiseType) -> f64 {
        self.aggregates
            .iter()
            .find(|a| a.noise_type == noise_type)
            .map(|a| a.mean_sdr_out_db - a.mean_sdr_in_db)
            .unwrap_or(f64::NAN)
    }

    /// Render the report; aggregate rows use utterance_id "mean".
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("utterance_id,noise_type,snr_in_db,sdr_in_db,sdr_out_db,acceptance_rate,runtime_s\n");
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{},{:.6}\n",
                r.utterance_id,
                r.noise_type,
                r.snr_in_db,
                r.sdr_in_db,
                r.sdr_out_db,
                fmt_opt(r.acceptance_rate),
                r.runtime_s
            ));
        }
        for a in &self.aggregates {
            out.push_str(&format!(
                "mean,{},{:.6},{:.6},{:.6},{},{:.6}\n",
                a.noise_type,
                a.snr_in_db,
                a.mean_sdr_in_db,
                a.mean_sdr_out_db,
                fmt_opt(a.mean_acceptance_rate),
                a.mean_runtime_s
            ));
        }
        out
    }
}

/// One utterance of one condition: synthesize, mix, enhance, score.
fn run_utterance(
    model: &VaeModel,
    condition: &SynthConfig,
    index: usize,
    priors: &PriorConfig,
    mcmc: &McmcConfig,
    stft_config: &StftConfig,
    enhancer: EnhancerKind,
) -> Result<UtteranceRow, EvalError> {
    let mut speech_rng = ChaCha8Rng::seed_from_u64(condition.seed);
    speech_rng.set_stream(2 * index as u64);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(condition.seed);
    noise_rng.set_stream(2 * index as u64 + 1);

    let speech = synth_speech(condition, &mut speech_rng)?;
    let noise = synth_noise(condition, &mut noise_rng)?;
    let mixture = mix_at_snr(&speech, &noise, condition.snr_db)?;

    // Normalize the mixture (and the reference identically) to a fixed RMS
    // so the utterance sits inside the power range the prior was trained
    // on; SDR itself is scale-invariant.
    let rms = (mixture.samples().iter().map(|v| v * v).sum::<f64>() / mixture.len() as f64).sqrt();
    let gain = 0.1 / rms;
    let mixture = SampleBuffer::new(
        mixture.samples().iter().map(|v| v * gain).collect(),
        mixture.sample_rate(),
    )?;
    let reference = SampleBuffer::new(
        speech.samples().iter().map(|v| v * gain).collect(),
        speech.sample_rate(),
    )?;

    let start = std::time::Instant::now();
    let (enhanced, acceptance) = match enhancer {
        EnhancerKind::VaeNmf => {
            let per_utterance_seed = mcmc
                .seed
                .wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let cfg = McmcConfig {
                seed: per_utterance_seed,
                ..mcmc.clone()
            };
            let result = enhance(&mixture, model, priors, &cfg, stft_config)?;
            let mean_acc = result.diagnostics.acceptance_rate.iter().sum::<f64>()
                / result.diagnostics.acceptance_rate.len().max(1) as f64;
            (result.enhanced, Some(mean_acc))
        }
        EnhancerKind::Passthrough => {
            let spec = stft(&mixture, stft_config)?;
            let dim = spec.bins.dim();
            let (filtered, _) =
                wiener_filter(&spec, &Array2::from_elem(dim, 1.0), &Array2::zeros(dim))?;
            (istft(&filtered, stft_config)?, None)
        }
    };
    let runtime_s = start.elapsed().as_secs_f64();

    Ok(UtteranceRow {
        utterance_id: format!("{}-{index:03}", condition.noise_type),
        noise_type: condition.noise_type,
        snr_in_db: condition.snr_db,
        sdr_in_db: sdr(&reference, &mixture)?,
        sdr_out_db: sdr(&reference, &enhanced)?,
        acceptance_rate: acceptance,
        runtime_s,
    })
}

/// Run every condition: per-utterance rows plus one aggregate per condition,
/// deterministic given the seeds. `jobs > 1` parallelizes over utterances.
pub fn run_experiment(
    model: &VaeModel,
    conditions: &[SynthConfig],
    priors: &PriorConfig,
    mcmc: &McmcConfig,
    stft_config: &StftConfig,
    enhancer: EnhancerKind,
    jobs: usize,
) -> Result<SdrReport, EvalError> {
    for condition in conditions {
        condition.validate()?;
    }
    let tasks: Vec<(usize, usize)> = conditions
        .iter()
        .enumerate()
        .flat_map(|(c, cfg)| (0..cfg.utterance_count).map(move |i| (c, i)))
        .collect();

    let run = |&(c, i): &(usize, usize)| {
        run_utterance(model, &conditions[c], i, priors, mcmc, stft_config, enhancer)
    };
    let rows: Vec<UtteranceRow> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| EvalError::InvalidConfig(e.to_string()))?;
        pool.install(|| tasks.par_iter().map(run).collect::<Result<_, _>>())?
    } else {
        tasks.iter().map(run).collect::<Result<_, _>>()?
    };

    let mut aggregates = Vec::with_capacity(conditions.len());
    for condition in conditions {
        let group: Vec<&UtteranceRow> = rows
            .iter()
            .filter(|r| r.noise_type == condition.noise_type && r.snr_in_db == condition.snr_db)
            .collect();
        if group.is_empty() {
            continue;
        }
        let n = group.len() as f64;
        let acc: Vec<f64> = group.iter().filter_map(|r| r.acceptance_rate).collect();
        aggregates.push(ConditionSummary {
            noise_type: condition.noise_type,
            snr_in_db: condition.snr_db,
            mean_sdr_in_db: group.iter().map(|r| r.sdr_in_db).sum::<f64>() / n,
            mean_sdr_out_db: group.iter().map(|r| r.sdr_out_db).sum::<f64>() / n,
            mean_acceptance_rate: if acc.is_empty() {
                None
            } else {
                Some(acc.iter().sum::<f64>() / acc.len() as f64)
            },
            mean_runtime_s: group.iter().map(|r| r.runtime_s).sum::<f64>() / n,
        });
    }
    Ok(SdrReport { rows, aggregates })
}
