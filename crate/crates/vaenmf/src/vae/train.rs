//! ELBO objective, power-scale augmentation, and the training loop.

use std::path::{Path, PathBuf};

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{VaeError, VaeModel, DEFAULT_HIDDEN_DIMS, DEFAULT_LATENT_DIM, DEFAULT_VARIANCE_FLOOR};
use crate::nn::{AdamState, ParamGrads};
use crate::signal::{power_spectrogram, read_wav, stft, StftConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub minibatch_frames: usize,
    pub learning_rate: f64,
    /// Every training frame is rescaled so its average power is uniform on
    /// (min, max]; exact zero is never drawn.
    pub power_aug_range: (f64, f64),
    pub seed: u64,
    pub variance_floor: f64,
    pub latent_dim: usize,
    pub hidden_dims: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            minibatch_frames: 128,
            learning_rate: 1e-3,
            power_aug_range: (0.0, 10.0),
            seed: 0,
            variance_floor: DEFAULT_VARIANCE_FLOOR,
            latent_dim: DEFAULT_LATENT_DIM,
            hidden_dims: DEFAULT_HIDDEN_DIMS.to_vec(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), VaeError> {
        if self.epochs == 0 || self.minibatch_frames == 0 {
            return Err(VaeError::ModelFormat(
                "epochs and minibatch_frames must be positive".into(),
            ));
        }
        if !(self.power_aug_range.0 < self.power_aug_range.1) {
            return Err(VaeError::ModelFormat(
                "power augmentation range endpoints must be ordered".into(),
            ));
        }
        if !(self.learning_rate > 0.0) || !(self.variance_floor > 0.0) {
            return Err(VaeError::ModelFormat(
                "learning_rate and variance_floor must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Gradients for both networks of a [`VaeModel`].
#[derive(Debug, Clone)]
pub struct VaeGrads {
    pub encoder: ParamGrads,
    pub decoder: ParamGrads,
}

/// Negative-ELBO breakdown (additive constants dropped).
#[derive(Debug, Clone, Copy)]
pub struct ElboParts {
    /// sum over (d, t) of (mu^2 + var - ln var) / 2.
    pub kl: f64,
    /// sum over (f, t) of (ln sigma_s + p / sigma_s).
    pub reconstruction: f64,
}

impl ElboParts {
    pub fn total(&self) -> f64 {
        self.kl + self.reconstruction
    }
}

/// Negative ELBO and exact gradients for a batch of power frames (columns),
/// with the reparameterization noise `eps` (latent_dim x batch) supplied by
/// the caller so the objective is a deterministic function of the model.
pub fn elbo_with_noise(
    model: &VaeModel,
    frames: ArrayView2<f64>,
    eps: ArrayView2<f64>,
) -> Result<(ElboParts, VaeGrads), VaeError> {
    let d = model.latent_dim();
    let batch = frames.ncols();
    if eps.nrows() != d || eps.ncols() != batch {
        return Err(VaeError::LatentLength {
            expected: d,
            found: eps.nrows(),
        });
    }
    if frames.nrows() != model.freq_bins() {
        return Err(VaeError::FrameLength {
            expected: model.freq_bins(),
            found: frames.nrows(),
        });
    }

    let transformed = frames.mapv(|p| p.ln_1p());
    let (enc_out, enc_tape) = model.encoder().forward_batch(transformed.view())?;
    let mu = enc_out.slice(s![0..d, ..]);
    let sigma_z = enc_out.slice(s![d..2 * d, ..]).mapv(crate::nn::softplus);

    // z = mu + sqrt(var) .* eps
    let mut z = mu.to_owned();
    ndarray::Zip::from(&mut z).and(&sigma_z).and(&eps).for_each(|z, &v, &e| {
        *z += v.sqrt() * e;
    });

    let (dec_out, dec_tape) = model.decoder().forward_batch(z.view())?;
    let sigma_s = &dec_out + model.variance_floor();

    let mut kl = 0.0;
    let mut recon = 0.0;
    for t in 0..batch {
        let mut frame_term = 0.0;
        for i in 0..d {
            frame_term += 0.5 * (mu[[i, t]].powi(2) + sigma_z[[i, t]] - sigma_z[[i, t]].ln());
        }
        kl += frame_term;
        let mut rec_term = 0.0;
        for f in 0..frames.nrows() {
            let v = sigma_s[[f, t]];
            rec_term += v.ln() + frames[[f, t]] / v;
        }
        recon += rec_term;
        if !frame_term.is_finite() || !rec_term.is_finite() {
            return Err(VaeError::NonFinite { frame: t });
        }
    }

    // d loss / d sigma_s = 1/v - p/v^2; the variance floor shifts by a
    // constant so the same gradient applies to the decoder output.
    let mut dsigma = sigma_s.clone();
    ndarray::Zip::from(&mut dsigma).and(&frames).for_each(|g, &p| {
        let v = *g;
        *g = 1.0 / v - p / (v * v);
    });
    let (dec_grads, dz) = model.decoder().backward_batch(&dec_tape, dsigma.view())?;

    // Chain into the encoder heads. For the mean head: d kl / d mu = mu plus
    // the path through z. For the variance head: d kl / d var = (1 - 1/var)/2
    // plus dz * eps / (2 sqrt var), then through softplus (derivative
    // sigmoid(raw) = 1 - exp(-var)).
    let mut enc_grad = Array2::zeros((2 * d, batch));
    for t in 0..batch {
        for i in 0..d {
            let v = sigma_z[[i, t]];
            enc_grad[[i, t]] = mu[[i, t]] + dz[[i, t]];
            let dvar = 0.5 * (1.0 - 1.0 / v) + dz[[i, t]] * eps[[i, t]] / (2.0 * v.sqrt());
            enc_grad[[i + d, t]] = dvar * (1.0 - (-v).exp());
        }
    }
    let (enc_grads, _) = model.encoder().backward_batch(&enc_tape, enc_grad.view())?;

    Ok((
        ElboParts {
            kl,
            reconstruction: recon,
        },
        VaeGrads {
            encoder: enc_grads,
            decoder: dec_grads,
        },
    ))
}

/// Negative ELBO with one reparameterized draw per frame taken from `rng`.
pub fn elbo_loss_and_grads<R: Rng>(
    model: &VaeModel,
    frames: ArrayView2<f64>,
    rng: &mut R,
) -> Result<(f64, VaeGrads), VaeError> {
    let eps = Array2::from_shape_fn((model.latent_dim(), frames.ncols()), |_| {
        rng.sample::<f64, _>(StandardNormal)
    });
    let (parts, grads) = elbo_with_noise(model, frames, eps.view())?;
    Ok((parts.total(), grads))
}

/// Rescale a power frame so its average power equals a uniform draw from
/// (range.0, range.1]. Zero frames pass through unchanged.
pub fn augment_power_scale<R: Rng>(
    frame: ArrayView1<f64>,
    range: (f64, f64),
    rng: &mut R,
) -> Array1<f64> {
    let mean = frame.mean().unwrap_or(0.0);
    if mean <= 0.0 {
        return frame.to_owned();
    }
    // 1 - u over u in [0, 1) lands in (0, 1], excluding the zero endpoint.
    let u = range.0 + (range.1 - range.0) * (1.0 - rng.gen::<f64>());
    frame.mapv(|p| p * (u / mean))
}

/// Train `model` on clean-speech power frames (columns of `corpus`).
/// Returns the trained model and the per-epoch mean loss trace.
pub fn train(
    model: VaeModel,
    corpus: ArrayView2<f64>,
    config: &TrainConfig,
) -> Result<(VaeModel, Vec<f64>), VaeError> {
    config.validate()?;
    if corpus.ncols() == 0 {
        return Err(VaeError::EmptyCorpus);
    }
    if corpus.nrows() != model.freq_bins() {
        return Err(VaeError::FrameLength {
            expected: model.freq_bins(),
            found: corpus.nrows(),
        });
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = model;
    let mut enc_adam = AdamState::new(model.encoder(), config.learning_rate);
    let mut dec_adam = AdamState::new(model.decoder(), config.learning_rate);
    let mut trace = Vec::with_capacity(config.epochs);
    let mut checkpoint = model.clone();

    let f = corpus.nrows();
    let n = corpus.ncols();
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.minibatch_frames) {
            let mut batch = Array2::zeros((f, chunk.len()));
            for (j, &idx) in chunk.iter().enumerate() {
                let frame = augment_power_scale(corpus.column(idx), config.power_aug_range, &mut rng);
                batch.column_mut(j).assign(&frame);
            }
            let eps = Array2::from_shape_fn((model.latent_dim(), chunk.len()), |_| {
                rng.sample::<f64, _>(StandardNormal)
            });
            let (parts, grads) = match elbo_with_noise(&model, batch.view(), eps.view()) {
                Ok(v) => v,
                Err(VaeError::NonFinite { frame }) => {
                    return Err(VaeError::Diverged {
                        epoch,
                        frame: chunk[frame],
                        checkpoint: Box::new(checkpoint),
                    });
                }
                Err(e) => return Err(e),
            };
            let loss = parts.total();
            if !loss.is_finite() || !grads.encoder.is_finite() || !grads.decoder.is_finite() {
                return Err(VaeError::Diverged {
                    epoch,
                    frame: chunk[0],
                    checkpoint: Box::new(checkpoint),
                });
            }
            epoch_loss += loss;
            enc_adam.step(model.encoder_mut(), &grads.encoder)?;
            dec_adam.step(model.decoder_mut(), &grads.decoder)?;
        }
        let mean_loss = epoch_loss / n as f64;
        log::debug!("epoch {epoch}: mean loss {mean_loss:.4}");
        trace.push(mean_loss);
        checkpoint = model.clone();
    }
    Ok((model, trace))
}

/// Mean power below which a frame is treated as silence and excluded from
/// training.
pub const SILENCE_THRESHOLD: f64 = 1e-10;

/// Load a training corpus: power frames from every WAV under `dir` (or the
/// paths listed in an optional `manifest.txt`), silent frames dropped.
pub fn load_corpus(dir: &Path, stft_config: &StftConfig) -> Result<Array2<f64>, VaeError> {
    let manifest = dir.join("manifest.txt");
    let mut paths: Vec<PathBuf> = if manifest.is_file() {
        std::fs::read_to_string(&manifest)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| dir.join(l))
            .collect()
    } else {
        let mut found = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
                found.push(path);
            }
        }
        found.sort();
        found
    };
    paths.retain(|p| p.is_file());
    if paths.is_empty() {
        return Err(VaeError::EmptyCorpus);
    }

    let f = stft_config.freq_bins();
    let mut columns: Vec<Array1<f64>> = Vec::new();
    for path in &paths {
        let buffer = read_wav(path)?;
        let spec = stft(&buffer, stft_config)?;
        let power = power_spectrogram(&spec);
        for col in power.values.axis_iter(Axis(1)) {
            if col.mean().unwrap_or(0.0) >= SILENCE_THRESHOLD {
                columns.push(col.to_owned());
            }
        }
    }
    if columns.is_empty() {
        return Err(VaeError::EmptyCorpus);
    }
    let mut corpus = Array2::zeros((f, columns.len()));
    for (j, col) in columns.iter().enumerate() {
        corpus.column_mut(j).assign(col);
    }
    Ok(corpus)
}
