//! The speech prior: encoder q(z | power frame), decoder mapping a latent
//! frame to the per-frequency variance of a zero-mean complex Gaussian
//! speech model, ELBO training on clean-speech power spectra, and model
//! persistence.

mod io;
mod train;

pub use io::{load_model, save_model};
pub use train::{
    augment_power_scale, elbo_loss_and_grads, elbo_with_noise, load_corpus, train, ElboParts,
    TrainConfig, VaeGrads,
};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::nn::{softplus, Activation, DenseLayer, Mlp, NnError};
use crate::signal::SignalError;

#[derive(Debug, Error)]
pub enum VaeError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("non-finite value in frame {frame}")]
    NonFinite { frame: usize },
    #[error("frame has {found} bins, model expects {expected}")]
    FrameLength { expected: usize, found: usize },
    #[error("latent vector has {found} dims, model expects {expected}")]
    LatentLength { expected: usize, found: usize },
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("training diverged at epoch {epoch}: loss became non-finite (frame {frame})")]
    Diverged {
        epoch: usize,
        frame: usize,
        /// Model state at the end of the last finite epoch.
        checkpoint: Box<VaeModel>,
    },
    #[error("model file error: {0}")]
    ModelFormat(String),
}

/// Default number of latent dimensions.
pub const DEFAULT_LATENT_DIM: usize = 10;
/// Default hidden layer widths for encoder and decoder.
pub const DEFAULT_HIDDEN_DIMS: [usize; 2] = [512, 512];
/// Default lower bound on decoded variances.
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-6;

/// Encoder/decoder pair over power-spectrum frames.
///
/// The encoder maps an F-dim power frame through a fixed log(1 + p)
/// transform and its MLP to 2D outputs: D latent means and D raw values
/// that pass through softplus to strictly positive variances. The decoder
/// maps a D-dim latent to F per-frequency variances, floored at
/// `variance_floor`.
#[derive(Debug, Clone)]
pub struct VaeModel {
    encoder: Mlp,
    decoder: Mlp,
    latent_dim: usize,
    freq_bins: usize,
    variance_floor: f64,
}

impl VaeModel {
    pub fn new<R: Rng>(
        freq_bins: usize,
        latent_dim: usize,
        hidden_dims: &[usize],
        variance_floor: f64,
        rng: &mut R,
    ) -> Self {
        assert!(freq_bins > 0 && latent_dim > 0 && variance_floor > 0.0);
        let mut enc = Vec::new();
        let mut prev = freq_bins;
        for &h in hidden_dims {
            enc.push(DenseLayer::random(prev, h, Activation::Tanh, rng));
            prev = h;
        }
        enc.push(DenseLayer::random(
            prev,
            2 * latent_dim,
            Activation::Identity,
            rng,
        ));

        let mut dec = Vec::new();
        prev = latent_dim;
        for &h in hidden_dims {
            dec.push(DenseLayer::random(prev, h, Activation::Tanh, rng));
            prev = h;
        }
        dec.push(DenseLayer::random(
            prev,
            freq_bins,
            Activation::Softplus,
            rng,
        ));

        Self {
            encoder: Mlp::new(enc).expect("encoder dims chain"),
            decoder: Mlp::new(dec).expect("decoder dims chain"),
            latent_dim,
            freq_bins,
            variance_floor,
        }
    }

    /// Assemble a model from existing networks, validating shapes.
    pub fn from_parts(
        encoder: Mlp,
        decoder: Mlp,
        latent_dim: usize,
        freq_bins: usize,
        variance_floor: f64,
    ) -> Result<Self, VaeError> {
        let enc_in = encoder.in_dim().unwrap_or(freq_bins);
        let enc_out = encoder.out_dim().unwrap_or(0);
        let dec_in = decoder.in_dim().unwrap_or(latent_dim);
        let dec_out = decoder.out_dim().unwrap_or(0);
        if enc_in != freq_bins || enc_out != 2 * latent_dim {
            return Err(VaeError::ModelFormat(format!(
                "encoder maps {enc_in} -> {enc_out}, expected {freq_bins} -> {}",
                2 * latent_dim
            )));
        }
        if dec_in != latent_dim || dec_out != freq_bins {
            return Err(VaeError::ModelFormat(format!(
                "decoder maps {dec_in} -> {dec_out}, expected {latent_dim} -> {freq_bins}"
            )));
        }
        if !(variance_floor > 0.0) {
            return Err(VaeError::ModelFormat("variance floor must be > 0".into()));
        }
        Ok(Self {
            encoder,
            decoder,
            latent_dim,
            freq_bins,
            variance_floor,
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn freq_bins(&self) -> usize {
        self.freq_bins
    }

    pub fn variance_floor(&self) -> f64 {
        self.variance_floor
    }

    pub fn encoder(&self) -> &Mlp {
        &self.encoder
    }

    pub fn decoder(&self) -> &Mlp {
        &self.decoder
    }

    pub(crate) fn encoder_mut(&mut self) -> &mut Mlp {
        &mut self.encoder
    }

    pub(crate) fn decoder_mut(&mut self) -> &mut Mlp {
        &mut self.decoder
    }

    /// Posterior parameters (mean, variance) for one power frame.
    pub fn encode(&self, power_frame: ArrayView1<f64>) -> Result<(Array1<f64>, Array1<f64>), VaeError> {
        let (mu, var) = self.encode_batch(power_frame.insert_axis(Axis(1)))?;
        Ok((
            mu.index_axis(Axis(1), 0).to_owned(),
            var.index_axis(Axis(1), 0).to_owned(),
        ))
    }

    /// Batched `encode`; frames are columns.
    pub fn encode_batch(
        &self,
        power_frames: ArrayView2<f64>,
    ) -> Result<(Array2<f64>, Array2<f64>), VaeError> {
        if power_frames.nrows() != self.freq_bins {
            return Err(VaeError::FrameLength {
                expected: self.freq_bins,
                found: power_frames.nrows(),
            });
        }
        if let Some(frame) = find_nonfinite_column(&power_frames) {
            return Err(VaeError::NonFinite { frame });
        }
        let transformed = power_frames.mapv(|p| p.ln_1p());
        let (out, _) = self.encoder.forward_batch(transformed.view())?;
        let d = self.latent_dim;
        let mu = out.slice(ndarray::s![0..d, ..]).to_owned();
        let var = out.slice(ndarray::s![d..2 * d, ..]).mapv(softplus);
        Ok((mu, var))
    }

    /// Per-frequency speech variances for one latent frame; every entry is
    /// at least `variance_floor`.
    pub fn decode(&self, z: ArrayView1<f64>) -> Result<Array1<f64>, VaeError> {
        let out = self.decode_batch(z.insert_axis(Axis(1)))?;
        Ok(out.index_axis(Axis(1), 0).to_owned())
    }

    /// Batched `decode`; latents are columns.
    pub fn decode_batch(&self, z: ArrayView2<f64>) -> Result<Array2<f64>, VaeError> {
        if z.nrows() != self.latent_dim {
            return Err(VaeError::LatentLength {
                expected: self.latent_dim,
                found: z.nrows(),
            });
        }
        if let Some(frame) = find_nonfinite_column(&z) {
            return Err(VaeError::NonFinite { frame });
        }
        let (out, _) = self.decoder.forward_batch(z)?;
        Ok(out + self.variance_floor)
    }
}

fn find_nonfinite_column(m: &ArrayView2<f64>) -> Option<usize> {
    (0..m.ncols()).find(|&j| m.column(j).iter().any(|v| !v.is_finite()))
}

/// Reparameterized draw z = mean + sqrt(var) .* eps with eps ~ N(0, I).
pub fn sample_latent<R: Rng>(
    mean: ArrayView1<f64>,
    var: ArrayView1<f64>,
    rng: &mut R,
) -> Array1<f64> {
    assert_eq!(mean.len(), var.len());
    Array1::from_shape_fn(mean.len(), |d| {
        let eps: f64 = rng.sample(StandardNormal);
        mean[d] + var[d].sqrt() * eps
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_weight_model(f: usize, d: usize) -> VaeModel {
        let enc = Mlp::new(vec![DenseLayer::new(
            Array2::zeros((2 * d, f)),
            Array1::zeros(2 * d),
            Activation::Identity,
        )])
        .unwrap();
        let dec = Mlp::new(vec![DenseLayer::new(
            Array2::zeros((f, d)),
            Array1::zeros(f),
            Activation::Softplus,
        )])
        .unwrap();
        VaeModel::from_parts(enc, dec, d, f, 1e-6).unwrap()
    }

    #[test]
    fn zero_weight_encoder_gives_standard_outputs() {
        let model = zero_weight_model(8, 3);
        let frame = Array1::from_elem(8, 2.5);
        let (mu, var) = model.encode(frame.view()).unwrap();
        assert_eq!(mu.len(), 3);
        assert_eq!(var.len(), 3);
        for d in 0..3 {
            assert_eq!(mu[d], 0.0);
            assert_relative_eq!(var[d], std::f64::consts::LN_2, max_relative = 1e-15);
        }
    }

    #[test]
    fn encode_rejects_non_finite() {
        let model = zero_weight_model(4, 2);
        let frame = array![1.0, f64::INFINITY, 0.0, 0.0];
        assert!(matches!(
            model.encode(frame.view()),
            Err(VaeError::NonFinite { frame: 0 })
        ));
    }

    #[test]
    fn encode_shape_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = VaeModel::new(16, 5, &[8], 1e-6, &mut rng);
        let frame = Array1::from_elem(16, 0.3);
        let (mu, var) = model.encode(frame.view()).unwrap();
        assert_eq!((mu.len(), var.len()), (5, 5));
        assert!(var.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn zero_weight_decoder_is_floored_softplus() {
        let model = zero_weight_model(6, 2);
        let sigma = model.decode(array![0.4, -0.2].view()).unwrap();
        assert_eq!(sigma.len(), 6);
        for &s in sigma.iter() {
            assert_relative_eq!(s, std::f64::consts::LN_2 + 1e-6, max_relative = 1e-12);
        }
    }

    #[test]
    fn decoder_respects_variance_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = VaeModel::new(12, 3, &[6], 1e-6, &mut rng);
        for trial in 0..20 {
            let z = Array1::from_shape_fn(3, |i| ((trial * 3 + i) as f64 * 0.7).sin() * 3.0);
            let sigma = model.decode(z.view()).unwrap();
            assert!(sigma.iter().all(|&s| s >= 1e-6));
        }
    }

    #[test]
    fn sample_latent_zero_variance_returns_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mean = array![0.5, -1.5];
        let z = sample_latent(mean.view(), array![0.0, 0.0].view(), &mut rng);
        assert_eq!(z, mean);
    }

    #[test]
    fn sample_latent_is_seed_deterministic() {
        let mean = array![0.0, 0.0, 0.0];
        let var = array![1.0, 2.0, 0.5];
        let a = sample_latent(mean.view(), var.view(), &mut ChaCha8Rng::seed_from_u64(7));
        let b = sample_latent(mean.view(), var.view(), &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
    }

    #[test]
    fn sample_latent_moments_match_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = 4;
        let mean = Array1::zeros(d);
        let var = Array1::ones(d);
        let n = 100_000;
        let mut sums = vec![0.0; d];
        let mut sqs = vec![0.0; d];
        for _ in 0..n {
            let z = sample_latent(mean.view(), var.view(), &mut rng);
            for i in 0..d {
                sums[i] += z[i];
                sqs[i] += z[i] * z[i];
            }
        }
        for i in 0..d {
            let m = sums[i] / n as f64;
            let v = sqs[i] / n as f64 - m * m;
            assert!(m.abs() <= 0.02, "dim {i}: mean {m}");
            assert!((0.97..=1.03).contains(&v), "dim {i}: var {v}");
        }
    }

    #[test]
    fn encoder_depends_only_on_power() {
        // Two complex frames with identical magnitudes but different phases
        // produce the same power frame, hence identical encodings.
        use num_complex::Complex64;
        let model = {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            VaeModel::new(4, 2, &[6], 1e-6, &mut rng)
        };
        let mags = [0.5, 1.5, 0.1, 2.0];
        let a: Array1<f64> = mags
            .iter()
            .map(|&m| Complex64::from_polar(m, 0.3).norm_sqr())
            .collect();
        let b: Array1<f64> = mags
            .iter()
            .map(|&m| Complex64::from_polar(m, -2.1).norm_sqr())
            .collect();
        let (mu_a, var_a) = model.encode(a.view()).unwrap();
        let (mu_b, var_b) = model.encode(b.view()).unwrap();
        let close = mu_a
            .iter()
            .zip(mu_b.iter())
            .chain(var_a.iter().zip(var_b.iter()))
            .all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close);
    }
}
