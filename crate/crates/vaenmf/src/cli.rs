//! Library entry points behind the command-line binary, with exit-code
//! classification: 0 success, 2 usage/config error, 3 data error,
//! 1 internal error.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Config, ConfigError};
use crate::enhance::{enhance, EnhanceError};
use crate::eval::{run_experiment, synth_noise, synth_speech, EnhancerKind, EvalError};
use crate::mcmc::McmcError;
use crate::signal::{read_wav, write_wav, SignalError};
use crate::vae::{load_corpus, load_model, save_model, train, VaeError, VaeModel};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SignalError> for CliError {
    fn from(e: SignalError) -> Self {
        match &e {
            SignalError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                CliError::Usage(e.to_string())
            }
            SignalError::Io(_) => CliError::Internal(e.to_string()),
            SignalError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<VaeError> for CliError {
    fn from(e: VaeError) -> Self {
        match e {
            VaeError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                CliError::Usage(io.to_string())
            }
            VaeError::Io(io) => CliError::Internal(io.to_string()),
            VaeError::EmptyCorpus => CliError::Usage("empty corpus".into()),
            VaeError::Signal(s) => s.into(),
            e @ VaeError::Diverged { .. } => CliError::Internal(e.to_string()),
            VaeError::Nn(e) => CliError::Internal(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<McmcError> for CliError {
    fn from(e: McmcError) -> Self {
        match &e {
            McmcError::Config(_) => CliError::Usage(e.to_string()),
            McmcError::ShapeMismatch { .. } => CliError::Data(e.to_string()),
            McmcError::Vae(_) => CliError::Data(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<EnhanceError> for CliError {
    fn from(e: EnhanceError) -> Self {
        match e {
            EnhanceError::Signal(s) => s.into(),
            EnhanceError::Mcmc(m) => m.into(),
            EnhanceError::Vae(v) => v.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Signal(s) => s.into(),
            EvalError::Enhance(en) => en.into(),
            EvalError::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn load_model_checked(path: &Path) -> Result<VaeModel, CliError> {
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "model file {} does not exist",
            path.display()
        )));
    }
    load_model(path).map_err(|e| match e {
        VaeError::ModelFormat(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other.into(),
    })
}

fn read_wav_checked(path: &Path) -> Result<crate::signal::SampleBuffer, CliError> {
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "input file {} does not exist",
            path.display()
        )));
    }
    Ok(read_wav(path)?)
}

/// Train a speech prior on a directory of clean WAV files and save it.
pub fn cmd_train(
    corpus_dir: &Path,
    config_path: &Path,
    model_out: &Path,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut config = Config::load(config_path)?;
    if let Some(s) = seed {
        config.override_seed(s);
    }
    if !corpus_dir.is_dir() {
        return Err(CliError::Usage(format!(
            "corpus directory {} does not exist",
            corpus_dir.display()
        )));
    }
    let corpus = load_corpus(corpus_dir, &config.stft)?;
    log::info!(
        "loaded {} frames of {} bins from {}",
        corpus.ncols(),
        corpus.nrows(),
        corpus_dir.display()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(config.train.seed);
    let model = VaeModel::new(
        config.stft.freq_bins(),
        config.train.latent_dim,
        &config.train.hidden_dims,
        config.train.variance_floor,
        &mut rng,
    );
    match train(model, corpus.view(), &config.train) {
        Ok((trained, trace)) => {
            for (epoch, loss) in trace.iter().enumerate() {
                log::info!("epoch {epoch}: loss {loss:.4}");
            }
            save_model(&trained, model_out)?;
            log::info!("model written to {}", model_out.display());
            Ok(())
        }
        Err(VaeError::Diverged {
            epoch,
            frame,
            checkpoint,
        }) => {
            save_model(&checkpoint, model_out)?;
            Err(CliError::Internal(format!(
                "training diverged at epoch {epoch} (frame {frame}); \
                 last good checkpoint written to {}",
                model_out.display()
            )))
        }
        Err(e) => Err(e.into()),
    }
}

/// Enhance one noisy WAV file.
pub fn cmd_enhance(
    model_path: &Path,
    input: &Path,
    output: &Path,
    diag: Option<&Path>,
    config_path: Option<&Path>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut config = match config_path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = seed {
        config.override_seed(s);
    }
    let model = load_model_checked(model_path)?;
    let noisy = read_wav_checked(input)?;
    let result = enhance(&noisy, &model, &config.prior, &config.mcmc, &config.stft)?;
    write_wav(output, &result.enhanced)?;
    log::info!(
        "enhanced {} -> {} ({} frames, mean acceptance {:.3})",
        input.display(),
        output.display(),
        result.wiener_mask.ncols(),
        result.diagnostics.acceptance_rate.iter().sum::<f64>()
            / result.diagnostics.acceptance_rate.len().max(1) as f64
    );
    if let Some(diag_path) = diag {
        let mut csv = String::from("iteration,log_likelihood,mean_acceptance_rate\n");
        for record in &result.diagnostics.trace {
            let _ = writeln!(
                csv,
                "{},{:.6},{:.6}",
                record.iteration, record.log_likelihood, record.acceptance
            );
        }
        write_file(diag_path, &csv)?;
    }
    Ok(())
}

/// Run the synthetic-mixture experiment and write the SDR report.
pub fn cmd_eval(
    model_path: &Path,
    config_path: &Path,
    report_out: &Path,
    seed: Option<u64>,
    jobs: usize,
) -> Result<(), CliError> {
    let mut config = Config::load(config_path)?;
    if let Some(s) = seed {
        config.override_seed(s);
    }
    let model = load_model_checked(model_path)?;
    let report = run_experiment(
        &model,
        &config.synth,
        &config.prior,
        &config.mcmc,
        &config.stft,
        EnhancerKind::VaeNmf,
        jobs,
    )?;
    for agg in &report.aggregates {
        log::info!(
            "{}: SDR {:.2} -> {:.2} dB over {} utterances",
            agg.noise_type,
            agg.mean_sdr_in_db,
            agg.mean_sdr_out_db,
            report
                .rows
                .iter()
                .filter(|r| r.noise_type == agg.noise_type)
                .count()
        );
    }
    write_file(report_out, &report.to_csv())
}

/// Write synthetic speech/noise/mixture WAVs for every configured condition.
pub fn cmd_synth(config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut config = Config::load(config_path)?;
    if let Some(s) = seed {
        config.override_seed(s);
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out_dir.display())))?;
    for condition in &config.synth {
        condition.validate().map_err(CliError::from)?;
        for i in 0..condition.utterance_count {
            let mut speech_rng = ChaCha8Rng::seed_from_u64(condition.seed);
            speech_rng.set_stream(2 * i as u64);
            let mut noise_rng = ChaCha8Rng::seed_from_u64(condition.seed);
            noise_rng.set_stream(2 * i as u64 + 1);
            let speech = synth_speech(condition, &mut speech_rng).map_err(CliError::from)?;
            let noise = synth_noise(condition, &mut noise_rng).map_err(CliError::from)?;
            let mixture = crate::eval::mix_at_snr(&speech, &noise, condition.snr_db)
                .map_err(CliError::from)?;
            let stem = format!("{}-{i:03}", condition.noise_type);
            write_wav(&out_dir.join(format!("{stem}-speech.wav")), &speech)?;
            write_wav(&out_dir.join(format!("{stem}-noise.wav")), &noise)?;
            write_wav(&out_dir.join(format!("{stem}-mixture.wav")), &mixture)?;
        }
    }
    log::info!("synthetic corpus written to {}", out_dir.display());
    Ok(())
}
