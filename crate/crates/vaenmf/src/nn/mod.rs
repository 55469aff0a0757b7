//! Minimal dense-network substrate: deterministic forward pass, exact
//! reverse-mode gradients, and an Adam optimizer. Everything is f64.

mod adam;
mod gradcheck;
mod mlp;

pub use adam::AdamState;
pub use gradcheck::gradient_check;
pub use mlp::{softplus, Activation, DenseLayer, Mlp, ParamGrads, Tape};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite gradient in layer {layer}")]
    NonFiniteGrad { layer: usize },
}
