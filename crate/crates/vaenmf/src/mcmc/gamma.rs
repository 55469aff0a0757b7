//! Gamma(shape, rate) variate generation.

use rand::Rng;
use rand_distr::Distribution;

use super::McmcError;

/// Draw from Gamma(shape, rate), density x^(shape-1) e^(-rate x).
pub fn sample_gamma<R: Rng>(shape: f64, rate: f64, rng: &mut R) -> Result<f64, McmcError> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(McmcError::InvalidParameter(format!(
            "gamma shape must be positive and finite, got {shape}"
        )));
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(McmcError::InvalidParameter(format!(
            "gamma rate must be positive and finite, got {rate}"
        )));
    }
    let dist = rand_distr::Gamma::new(shape, 1.0 / rate)
        .map_err(|e| McmcError::InvalidParameter(e.to_string()))?;
    Ok(dist.sample(rng))
}
