//! Semi-supervised single-channel speech enhancement.
//!
//! A variational autoencoder is pre-trained on clean-speech power spectra
//! and used as a prior on speech; noise is modeled by low-rank NMF with
//! gamma priors. Given a noisy recording, an MCMC sampler infers the
//! posterior over noise bases, activations, and speech latents, and the
//! enhanced signal is reconstructed with a Wiener filter built from the
//! posterior means.
//!
//! See the `examples/` directory for one runnable example per capability
//! (training, enhancement, inference diagnostics, synthesis, the signal
//! layer, and the samplers), and the `vaenmf` binary for the `train`,
//! `enhance`, `eval`, and `synth` subcommands.

pub mod cli;
pub mod config;
pub mod enhance;
pub mod eval;
pub mod mcmc;
pub mod nn;
pub mod signal;
pub mod vae;

pub use signal::{
    istft, power_spectrogram, read_wav, stft, write_wav, ComplexSpectrogram, PowerSpectrogram,
    SampleBuffer, SignalError, StftConfig,
};
pub use vae::{
    augment_power_scale, elbo_loss_and_grads, load_corpus, load_model, sample_latent, save_model,
    train, TrainConfig, VaeError, VaeModel,
};
