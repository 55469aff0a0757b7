//! Projection-based signal-to-distortion ratio.
//!
//! The estimate is orthogonally projected onto the reference; SDR is the
//! dB ratio of the projection energy to the residual energy. This is the
//! single-source definition without distortion-filter allowances, so values
//! are not directly comparable to full BSS-style toolkits.

use crate::signal::SampleBuffer;

use super::EvalError;

/// dB cap applied in both directions to keep the metric finite.
pub const SDR_CAP_DB: f64 = 100.0;

pub fn sdr(reference: &SampleBuffer, estimate: &SampleBuffer) -> Result<f64, EvalError> {
    if reference.len() != estimate.len() {
        return Err(EvalError::LengthMismatch(reference.len(), estimate.len()));
    }
    let r = reference.samples();
    let e = estimate.samples();
    let rr: f64 = r.iter().map(|v| v * v).sum();
    if rr <= 0.0 {
        return Err(EvalError::ZeroReference);
    }
    let er: f64 = e.iter().zip(r).map(|(a, b)| a * b).sum();
    let alpha = er / rr;
    let proj_energy = alpha * alpha * rr;
    let resid_energy: f64 = e
        .iter()
        .zip(r)
        .map(|(a, b)| {
            let d = a - alpha * b;
            d * d
        })
        .sum();

    if proj_energy <= 0.0 {
        return Ok(-SDR_CAP_DB);
    }
    if resid_energy <= proj_energy * 1e-10 {
        return Ok(SDR_CAP_DB);
    }
    Ok((10.0 * (proj_energy / resid_energy).log10()).clamp(-SDR_CAP_DB, SDR_CAP_DB))
}
