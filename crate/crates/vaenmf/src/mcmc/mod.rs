//! Posterior inference over the combined speech/noise model.
//!
//! Given a noisy power spectrogram, one sweep updates the noise basis and
//! activation matrices and then each frame's speech latent. Noise updates
//! draw candidates from the generalized-inverse-Gaussian conditionals built
//! from auxiliary per-bin shares; because those conditionals come from a
//! variational bound rather than the exact posterior, each independent
//! block (one basis row per frequency, one activation column per frame) is
//! passed through a Metropolis-Hastings accept step so the chain is exactly
//! invariant for the posterior. Latents use a random-walk Metropolis step
//! under the exponential likelihood. Retained sweeps are averaged into
//! posterior means.

mod bessel;
mod gamma;
mod gig;

pub use gamma::sample_gamma;
pub use gig::sample_gig;

use bessel::log_bessel_k;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::{power_spectrogram, ComplexSpectrogram};
use crate::vae::{VaeError, VaeModel};

/// Floor applied to mixture variances before logs and divisions.
pub const LAMBDA_FLOOR: f64 = 1e-12;
// Keeps resampled noise parameters strictly positive.
const POSITIVE_FLOOR: f64 = 1e-100;

#[derive(Debug, Error)]
pub enum McmcError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Vae(#[from] VaeError),
    #[error("model expects {expected} frequency bins, spectrogram has {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("sweep {iteration} failed: {source}")]
    Sweep {
        iteration: usize,
        #[source]
        source: Box<McmcError>,
    },
}

/// Anything usable as the speech half of the generative model: a decoder
/// from latent frames to per-frequency speech variances, plus an encoder
/// used only to initialize the chain (the default draws from the latent
/// prior).
pub trait SpeechPrior {
    fn latent_dim(&self) -> usize;
    fn freq_bins(&self) -> usize;

    fn speech_variance(&self, z: ArrayView1<f64>) -> Result<Array1<f64>, VaeError>;

    fn speech_variance_batch(&self, z: ArrayView2<f64>) -> Result<Array2<f64>, VaeError> {
        let mut out = Array2::zeros((self.freq_bins(), z.ncols()));
        for (t, col) in z.axis_iter(Axis(1)).enumerate() {
            out.column_mut(t).assign(&self.speech_variance(col)?);
        }
        Ok(out)
    }

    /// Posterior parameters (mean, variance) used to seed the latents.
    fn encode_frame(&self, power: ArrayView1<f64>) -> Result<(Array1<f64>, Array1<f64>), VaeError> {
        let _ = power;
        Ok((
            Array1::zeros(self.latent_dim()),
            Array1::ones(self.latent_dim()),
        ))
    }
}

impl SpeechPrior for VaeModel {
    fn latent_dim(&self) -> usize {
        VaeModel::latent_dim(self)
    }

    fn freq_bins(&self) -> usize {
        VaeModel::freq_bins(self)
    }

    fn speech_variance(&self, z: ArrayView1<f64>) -> Result<Array1<f64>, VaeError> {
        self.decode(z)
    }

    fn speech_variance_batch(&self, z: ArrayView2<f64>) -> Result<Array2<f64>, VaeError> {
        self.decode_batch(z)
    }

    fn encode_frame(&self, power: ArrayView1<f64>) -> Result<(Array1<f64>, Array1<f64>), VaeError> {
        self.encode(power)
    }
}

/// Gamma priors on the noise factorization and the basis count K.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorConfig {
    pub a0: f64,
    pub b0: f64,
    pub a1: f64,
    /// Rate of the activation prior. `None` resolves to K / scale, where
    /// scale is the mean power of the utterance being enhanced.
    pub b1: Option<f64>,
    pub k: usize,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            a0: 1.0,
            b0: 1.0,
            a1: 1.0,
            b1: None,
            k: 5,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<(), McmcError> {
        let all_pos = self.a0 > 0.0
            && self.b0 > 0.0
            && self.a1 > 0.0
            && self.b1.map_or(true, |b| b > 0.0)
            && self.k > 0;
        if !all_pos {
            return Err(McmcError::Config(
                "prior parameters and basis count must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The activation-prior rate for an utterance with the given mean power.
    pub fn resolve_b1(&self, scale: f64) -> f64 {
        self.b1.unwrap_or(self.k as f64 / scale.max(LAMBDA_FLOOR))
    }
}

/// Chain length and proposal width.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub burn_in: usize,
    pub samples: usize,
    /// Variance of the Gaussian random-walk proposal on each latent frame.
    pub proposal_sigma: f64,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            burn_in: 100,
            samples: 50,
            proposal_sigma: 0.01,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<(), McmcError> {
        if self.samples == 0 {
            return Err(McmcError::Config("samples must be at least 1".into()));
        }
        if !(self.proposal_sigma > 0.0) {
            return Err(McmcError::Config("proposal_sigma must be positive".into()));
        }
        Ok(())
    }
}

/// Low-rank noise factorization: `basis` is F x K, `activations` K x T,
/// both strictly positive.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub basis: Array2<f64>,
    pub activations: Array2<f64>,
}

impl NoiseModel {
    /// The modeled noise power spectral density, basis . activations.
    pub fn psd(&self) -> Array2<f64> {
        self.basis.dot(&self.activations)
    }
}

/// Per-frame auxiliary quantities for one time frame: the per-bin mixture
/// variances lambda_f = sum_k w_fk h_k + sigma_f, and the per-(f, k) noise
/// component shares phi_fk = w_fk h_k / lambda_f.
pub fn compute_aux(
    basis: ArrayView2<f64>,
    h_col: ArrayView1<f64>,
    sigma_col: ArrayView1<f64>,
) -> (Array1<f64>, Array2<f64>) {
    let f = basis.nrows();
    let k = basis.ncols();
    let mut lambda = sigma_col.to_owned();
    for fi in 0..f {
        let mut acc = 0.0;
        for ki in 0..k {
            acc += basis[[fi, ki]] * h_col[ki];
        }
        lambda[fi] = (lambda[fi] + acc).max(LAMBDA_FLOOR);
    }
    let mut phi = Array2::zeros((f, k));
    for fi in 0..f {
        for ki in 0..k {
            phi[[fi, ki]] = basis[[fi, ki]] * h_col[ki] / lambda[fi];
        }
    }
    (lambda, phi)
}

/// GIG conditional parameters (rho, tau) for every basis entry:
/// rho_fk = b0 + sum_t h_kt / lambda_ft and
/// tau_fk = sum_t p_ft phi_fkt^2 / h_kt = w_fk^2 sum_t p_ft h_kt / lambda_ft^2,
/// with lambda and the shares phi evaluated at the given state.
pub fn basis_conditional_params(
    basis: ArrayView2<f64>,
    activations: ArrayView2<f64>,
    sigma_s: ArrayView2<f64>,
    power: ArrayView2<f64>,
    b0: f64,
) -> (Array2<f64>, Array2<f64>) {
    let mut lambda = basis.dot(&activations);
    lambda.zip_mut_with(&sigma_s, |l, &s| *l = (*l + s).max(LAMBDA_FLOOR));
    let inv = lambda.mapv(|l| 1.0 / l);
    let rho = inv.dot(&activations.t()) + b0;
    let mut weighted = inv.mapv(|x| x * x);
    weighted *= &power;
    let mut tau = weighted.dot(&activations.t());
    tau.zip_mut_with(&basis, |t, &w| *t *= w * w);
    (rho, tau)
}

/// GIG conditional parameters for every activation entry, symmetric to
/// `basis_conditional_params`:
/// rho_kt = b1 + sum_f w_fk / lambda_ft and
/// tau_kt = h_kt^2 sum_f p_ft w_fk / lambda_ft^2.
pub fn activation_conditional_params(
    basis: ArrayView2<f64>,
    activations: ArrayView2<f64>,
    sigma_s: ArrayView2<f64>,
    power: ArrayView2<f64>,
    b1: f64,
) -> (Array2<f64>, Array2<f64>) {
    let mut lambda = basis.dot(&activations);
    lambda.zip_mut_with(&sigma_s, |l, &s| *l = (*l + s).max(LAMBDA_FLOOR));
    let inv = lambda.mapv(|l| 1.0 / l);
    let rho = basis.t().dot(&inv) + b1;
    let mut weighted = inv.mapv(|x| x * x);
    weighted *= &power;
    let mut tau = basis.t().dot(&weighted);
    tau.zip_mut_with(&activations, |t, &h| *t *= h * h);
    (rho, tau)
}

// Log density of GIG(gamma, rho, tau) at x, normalizer included; tau = 0 is
// the Gamma(gamma, rho) limit.
fn gig_log_density(x: f64, gamma: f64, rho: f64, tau: f64) -> f64 {
    let log_norm = if tau == 0.0 {
        libm::lgamma(gamma) - gamma * rho.ln()
    } else {
        std::f64::consts::LN_2
            + 0.5 * gamma * (tau.ln() - rho.ln())
            + log_bessel_k(gamma, 2.0 * (rho * tau).sqrt())
    };
    (gamma - 1.0) * x.ln() - rho * x - tau / x - log_norm
}

/// Exponential log-likelihood of one frame's power under the mixture
/// variances lambda_f = sum_k w_fk h_k + sigma_f:
/// sum_f (-ln lambda_f - p_f / lambda_f).
pub fn frame_log_likelihood(
    power_col: ArrayView1<f64>,
    basis: ArrayView2<f64>,
    h_col: ArrayView1<f64>,
    sigma_col: ArrayView1<f64>,
) -> f64 {
    let mut total = 0.0;
    for fi in 0..basis.nrows() {
        let mut lambda = sigma_col[fi];
        for ki in 0..basis.ncols() {
            lambda += basis[[fi, ki]] * h_col[ki];
        }
        let lambda = lambda.max(LAMBDA_FLOOR);
        total += -lambda.ln() - power_col[fi] / lambda;
    }
    total
}

/// One MCMC state: current noise factorization and latent matrix, posterior
/// accumulators, acceptance counters, and the RNG streams.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub noise: NoiseModel,
    /// D x T latent matrix.
    pub latents: Array2<f64>,
    /// Cached decoder output for the current latents (F x T).
    sigma_s: Array2<f64>,
    /// Resolved rate of the activation prior.
    pub b1: f64,
    sum_basis: Array2<f64>,
    sum_activations: Array2<f64>,
    sum_latents: Array2<f64>,
    retained: usize,
    accepted: Vec<u64>,
    attempts: u64,
    noise_accepts: u64,
    noise_attempts: u64,
    rng: ChaCha8Rng,
    frame_rngs: Vec<ChaCha8Rng>,
}

/// Posterior means over retained sweeps plus per-frame acceptance rates.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub mean_basis: Array2<f64>,
    pub mean_activations: Array2<f64>,
    pub mean_latents: Array2<f64>,
    pub acceptance_rate: Vec<f64>,
}

/// One per-sweep diagnostic record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub log_likelihood: f64,
    /// Fraction of frames whose Metropolis proposal was accepted this sweep.
    pub acceptance: f64,
}

/// A finished chain: posterior summary plus the per-sweep trace.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub summary: PosteriorSummary,
    pub trace: Vec<IterationRecord>,
}

impl ChainState {
    /// Initialize from the noisy power spectrogram: latents drawn from the
    /// encoder posterior per frame, noise parameters from their priors.
    pub fn init<M: SpeechPrior>(
        power: ArrayView2<f64>,
        model: &M,
        priors: &PriorConfig,
        config: &McmcConfig,
    ) -> Result<Self, McmcError> {
        priors.validate()?;
        config.validate()?;
        let f = power.nrows();
        let t = power.ncols();
        if f != model.freq_bins() {
            return Err(McmcError::ShapeMismatch {
                expected: model.freq_bins(),
                found: f,
            });
        }
        if t == 0 {
            return Err(McmcError::Config("spectrogram has no frames".into()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        // Independent per-frame streams so frame updates are order-free.
        let frame_rngs: Vec<ChaCha8Rng> = (0..t)
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(config.seed);
                r.set_stream(i as u64 + 1);
                r
            })
            .collect();
        let mut frame_rngs = frame_rngs;

        let scale = power.mean().unwrap_or(0.0);
        let b1 = priors.resolve_b1(scale);

        let k = priors.k;
        let mut basis = Array2::zeros((f, k));
        for v in basis.iter_mut() {
            *v = sample_gamma(priors.a0, priors.b0, &mut rng)?.max(POSITIVE_FLOOR);
        }
        let mut activations = Array2::zeros((k, t));
        for v in activations.iter_mut() {
            *v = sample_gamma(priors.a1, b1, &mut rng)?.max(POSITIVE_FLOOR);
        }

        let d = model.latent_dim();
        let mut latents = Array2::zeros((d, t));
        for ti in 0..t {
            let (mu, var) = model.encode_frame(power.column(ti))?;
            let r = &mut frame_rngs[ti];
            for di in 0..d {
                let eps: f64 = r.sample(StandardNormal);
                latents[[di, ti]] = mu[di] + var[di].sqrt() * eps;
            }
        }
        let sigma_s = model.speech_variance_batch(latents.view())?;

        Ok(Self {
            noise: NoiseModel {
                basis,
                activations,
            },
            latents,
            sigma_s,
            b1,
            sum_basis: Array2::zeros((f, k)),
            sum_activations: Array2::zeros((k, t)),
            sum_latents: Array2::zeros((d, t)),
            retained: 0,
            accepted: vec![0; t],
            attempts: 0,
            noise_accepts: 0,
            noise_attempts: 0,
            rng,
            frame_rngs,
        })
    }

    pub fn frames(&self) -> usize {
        self.latents.ncols()
    }

    fn lambda(&self) -> Array2<f64> {
        let mut lambda = self.noise.psd();
        lambda.zip_mut_with(&self.sigma_s, |l, &s| *l = (*l + s).max(LAMBDA_FLOOR));
        lambda
    }

    /// Total exponential log-likelihood of the current state.
    pub fn log_likelihood(&self, power: ArrayView2<f64>) -> f64 {
        let lambda = self.lambda();
        let mut total = 0.0;
        ndarray::Zip::from(&lambda).and(&power).for_each(|&l, &p| {
            total += -l.ln() - p / l;
        });
        total
    }

    /// Update the noise basis: draw a candidate for every entry from its
    /// GIG conditional (auxiliaries frozen at the pre-update state), then
    /// accept or reject per frequency row with the exact Metropolis-Hastings
    /// ratio. Rows are mutually independent given the activations, so the
    /// per-row decisions compose into one exact kernel.
    pub fn update_basis(
        &mut self,
        power: ArrayView2<f64>,
        priors: &PriorConfig,
    ) -> Result<(), McmcError> {
        let basis = self.noise.basis.clone();
        let acts = self.noise.activations.view();
        let (rho, tau) = basis_conditional_params(
            basis.view(),
            acts,
            self.sigma_s.view(),
            power,
            priors.b0,
        );

        let mut proposal = Array2::zeros(basis.dim());
        for fi in 0..basis.nrows() {
            for ki in 0..basis.ncols() {
                let (r, t) = (rho[[fi, ki]], tau[[fi, ki]]);
                if !r.is_finite() || !t.is_finite() {
                    return Err(McmcError::InvalidParameter(format!(
                        "non-finite GIG parameters for basis entry ({fi}, {ki})"
                    )));
                }
                proposal[[fi, ki]] =
                    sample_gig(priors.a0, r, t, &mut self.rng)?.max(POSITIVE_FLOOR);
            }
        }
        let (rho_rev, tau_rev) = basis_conditional_params(
            proposal.view(),
            acts,
            self.sigma_s.view(),
            power,
            priors.b0,
        );

        let fit_old = self.row_fit(&basis, power);
        let fit_new = self.row_fit(&proposal, power);
        for fi in 0..basis.nrows() {
            let mut log_alpha = fit_new[fi] - fit_old[fi];
            for ki in 0..basis.ncols() {
                let w_old = basis[[fi, ki]];
                let w_new = proposal[[fi, ki]];
                log_alpha += (priors.a0 - 1.0) * (w_new.ln() - w_old.ln())
                    - priors.b0 * (w_new - w_old);
                log_alpha +=
                    gig_log_density(w_old, priors.a0, rho_rev[[fi, ki]], tau_rev[[fi, ki]]);
                log_alpha -= gig_log_density(w_new, priors.a0, rho[[fi, ki]], tau[[fi, ki]]);
            }
            let ln_u: f64 = (1.0 - self.rng.gen::<f64>()).ln();
            self.noise_attempts += 1;
            if ln_u <= log_alpha {
                self.noise.basis.row_mut(fi).assign(&proposal.row(fi));
                self.noise_accepts += 1;
            }
        }
        Ok(())
    }

    /// Update the activations, symmetric to `update_basis` with the
    /// independent blocks being time columns.
    pub fn update_activations(
        &mut self,
        power: ArrayView2<f64>,
        priors: &PriorConfig,
    ) -> Result<(), McmcError> {
        let acts = self.noise.activations.clone();
        let basis = self.noise.basis.view();
        let (rho, tau) = activation_conditional_params(
            basis,
            acts.view(),
            self.sigma_s.view(),
            power,
            self.b1,
        );

        let mut proposal = Array2::zeros(acts.dim());
        for ki in 0..acts.nrows() {
            for ti in 0..acts.ncols() {
                let (r, t) = (rho[[ki, ti]], tau[[ki, ti]]);
                if !r.is_finite() || !t.is_finite() {
                    return Err(McmcError::InvalidParameter(format!(
                        "non-finite GIG parameters for activation entry ({ki}, {ti})"
                    )));
                }
                proposal[[ki, ti]] =
                    sample_gig(priors.a1, r, t, &mut self.rng)?.max(POSITIVE_FLOOR);
            }
        }
        let (rho_rev, tau_rev) = activation_conditional_params(
            basis,
            proposal.view(),
            self.sigma_s.view(),
            power,
            self.b1,
        );

        let fit_old = self.column_fit(&acts, power);
        let fit_new = self.column_fit(&proposal, power);
        for ti in 0..acts.ncols() {
            let mut log_alpha = fit_new[ti] - fit_old[ti];
            for ki in 0..acts.nrows() {
                let h_old = acts[[ki, ti]];
                let h_new = proposal[[ki, ti]];
                log_alpha +=
                    (priors.a1 - 1.0) * (h_new.ln() - h_old.ln()) - self.b1 * (h_new - h_old);
                log_alpha +=
                    gig_log_density(h_old, priors.a1, rho_rev[[ki, ti]], tau_rev[[ki, ti]]);
                log_alpha -= gig_log_density(h_new, priors.a1, rho[[ki, ti]], tau[[ki, ti]]);
            }
            let ln_u: f64 = (1.0 - self.rng.gen::<f64>()).ln();
            self.noise_attempts += 1;
            if ln_u <= log_alpha {
                self.noise
                    .activations
                    .column_mut(ti)
                    .assign(&proposal.column(ti));
                self.noise_accepts += 1;
            }
        }
        Ok(())
    }

    // Per-frequency-row data fit sum_t (-ln lambda - p/lambda) for a basis
    // candidate against the current activations and speech variances.
    fn row_fit(&self, basis: &Array2<f64>, power: ArrayView2<f64>) -> Array1<f64> {
        let mut lambda = basis.dot(&self.noise.activations);
        lambda.zip_mut_with(&self.sigma_s, |l, &s| *l = (*l + s).max(LAMBDA_FLOOR));
        let mut fit = Array1::zeros(basis.nrows());
        for fi in 0..basis.nrows() {
            let mut acc = 0.0;
            for ti in 0..lambda.ncols() {
                let l = lambda[[fi, ti]];
                acc += -l.ln() - power[[fi, ti]] / l;
            }
            fit[fi] = acc;
        }
        fit
    }

    // Per-time-column data fit for an activation candidate.
    fn column_fit(&self, acts: &Array2<f64>, power: ArrayView2<f64>) -> Array1<f64> {
        let mut lambda = self.noise.basis.dot(acts);
        lambda.zip_mut_with(&self.sigma_s, |l, &s| *l = (*l + s).max(LAMBDA_FLOOR));
        let mut fit = Array1::zeros(acts.ncols());
        for ti in 0..acts.ncols() {
            let mut acc = 0.0;
            for fi in 0..lambda.nrows() {
                let l = lambda[[fi, ti]];
                acc += -l.ln() - power[[fi, ti]] / l;
            }
            fit[ti] = acc;
        }
        fit
    }

    /// Fraction of accepted noise-block proposals so far.
    pub fn noise_acceptance(&self) -> f64 {
        self.noise_accepts as f64 / self.noise_attempts.max(1) as f64
    }

    /// Random-walk Metropolis update of every frame's latent vector under
    /// the exponential likelihood and the standard-normal latent prior.
    /// Returns the fraction of frames accepted.
    pub fn update_latents<M: SpeechPrior>(
        &mut self,
        power: ArrayView2<f64>,
        model: &M,
        config: &McmcConfig,
    ) -> Result<f64, McmcError> {
        let t = self.frames();
        let d = self.latents.nrows();
        let std = config.proposal_sigma.sqrt();

        let mut proposals = self.latents.clone();
        for ti in 0..t {
            let r = &mut self.frame_rngs[ti];
            for di in 0..d {
                let eps: f64 = r.sample(StandardNormal);
                proposals[[di, ti]] += std * eps;
            }
        }
        let sigma_prop = model.speech_variance_batch(proposals.view())?;

        let noise_psd = self.noise.psd();
        let mut accepted_now = 0usize;
        for ti in 0..t {
            let mut log_ratio = 0.0;
            for fi in 0..power.nrows() {
                let n = noise_psd[[fi, ti]];
                let p = power[[fi, ti]];
                let cur = (n + self.sigma_s[[fi, ti]]).max(LAMBDA_FLOOR);
                let prop = (n + sigma_prop[[fi, ti]]).max(LAMBDA_FLOOR);
                log_ratio += cur.ln() + p / cur - prop.ln() - p / prop;
            }
            for di in 0..d {
                let zc = self.latents[[di, ti]];
                let zp = proposals[[di, ti]];
                log_ratio += 0.5 * (zc * zc - zp * zp);
            }
            let ln_u: f64 = (1.0 - self.frame_rngs[ti].gen::<f64>()).ln();
            if ln_u <= log_ratio {
                for di in 0..d {
                    self.latents[[di, ti]] = proposals[[di, ti]];
                }
                for fi in 0..power.nrows() {
                    self.sigma_s[[fi, ti]] = sigma_prop[[fi, ti]];
                }
                self.accepted[ti] += 1;
                accepted_now += 1;
            }
        }
        self.attempts += 1;
        Ok(accepted_now as f64 / t as f64)
    }

    /// Add the current state to the posterior accumulators.
    pub fn retain(&mut self) {
        self.sum_basis += &self.noise.basis;
        self.sum_activations += &self.noise.activations;
        self.sum_latents += &self.latents;
        self.retained += 1;
    }

    pub fn summary(&self) -> PosteriorSummary {
        let n = self.retained.max(1) as f64;
        PosteriorSummary {
            mean_basis: &self.sum_basis / n,
            mean_activations: &self.sum_activations / n,
            mean_latents: &self.sum_latents / n,
            acceptance_rate: self
                .accepted
                .iter()
                .map(|&a| a as f64 / self.attempts.max(1) as f64)
                .collect(),
        }
    }
}

/// Run a full chain on a noisy spectrogram: burn-in sweeps discarded, the
/// following `samples` sweeps averaged. Each sweep updates the basis, the
/// activations, then the latents.
pub fn run_chain<M: SpeechPrior>(
    spectrogram: &ComplexSpectrogram,
    model: &M,
    priors: &PriorConfig,
    config: &McmcConfig,
) -> Result<ChainOutput, McmcError> {
    let power = power_spectrogram(spectrogram);
    run_chain_on_power(power.values.view(), model, priors, config)
}

/// `run_chain` on an already-computed power spectrogram.
pub fn run_chain_on_power<M: SpeechPrior>(
    power: ArrayView2<f64>,
    model: &M,
    priors: &PriorConfig,
    config: &McmcConfig,
) -> Result<ChainOutput, McmcError> {
    let mut state = ChainState::init(power, model, priors, config)?;
    let total = config.burn_in + config.samples;
    let mut trace = Vec::with_capacity(total);
    for iteration in 0..total {
        let wrap = |source: McmcError| McmcError::Sweep {
            iteration,
            source: Box::new(source),
        };
        state.update_basis(power, priors).map_err(wrap)?;
        state.update_activations(power, priors).map_err(wrap)?;
        let acceptance = state.update_latents(power, model, config).map_err(wrap)?;
        if iteration >= config.burn_in {
            state.retain();
        }
        trace.push(IterationRecord {
            iteration,
            log_likelihood: state.log_likelihood(power),
            acceptance,
        });
    }
    Ok(ChainOutput {
        summary: state.summary(),
        trace,
    })
}
