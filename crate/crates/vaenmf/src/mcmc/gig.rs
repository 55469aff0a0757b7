//! Generalized inverse Gaussian variate generation.
//!
//! Parameterized by the unnormalized density x^(gamma-1) exp(-rho x - tau/x)
//! on x > 0. For tau = 0 this is Gamma(gamma, rho). Otherwise the sampler
//! is a rejection method on t = ln(x / c) with c = sqrt(tau/rho): the
//! transformed density exp(gamma t - omega cosh t), omega = 2 sqrt(rho tau),
//! is strictly log-concave, so a flat center piece between the two points
//! where it falls by a factor e, plus tangent exponential tails, dominates
//! it with a bounded rejection constant for every parameter combination.

use rand::Rng;
use rand_distr::Exp1;

use super::{gamma::sample_gamma, McmcError};

/// Draw from GIG(gamma, rho, tau) with density proportional to
/// x^(gamma-1) exp(-rho x - tau/x).
///
/// Requires rho > 0 and tau >= 0; when tau = 0 the density is only proper
/// for gamma > 0.
pub fn sample_gig<R: Rng>(gamma: f64, rho: f64, tau: f64, rng: &mut R) -> Result<f64, McmcError> {
    if !gamma.is_finite() || !(rho > 0.0) || !rho.is_finite() || !(tau >= 0.0) || !tau.is_finite() {
        return Err(McmcError::InvalidParameter(format!(
            "GIG parameters out of range: gamma={gamma}, rho={rho}, tau={tau}"
        )));
    }
    if tau == 0.0 {
        if !(gamma > 0.0) {
            return Err(McmcError::InvalidParameter(format!(
                "GIG with tau=0 requires gamma > 0, got {gamma}"
            )));
        }
        return sample_gamma(gamma, rho, rng);
    }

    // Scale so the two exponential terms are symmetric: x = c e^t.
    let log_scale = 0.5 * (tau.ln() - rho.ln());
    // ln(omega / 2) with omega = 2 sqrt(rho tau), kept in log form so that
    // extreme products neither overflow nor underflow.
    let log_half_omega = 0.5 * (rho.ln() + tau.ln());

    let omega_cosh = |t: f64| (log_half_omega + t).exp() + (log_half_omega - t).exp();
    let omega_sinh = |t: f64| (log_half_omega + t).exp() - (log_half_omega - t).exp();

    // Mode of the transformed density: asinh(gamma / omega), evaluated in
    // log space when the ratio is too large to form directly.
    let log_omega = log_half_omega + std::f64::consts::LN_2;
    let log_abs_ratio = gamma.abs().ln() - log_omega;
    let mode = if log_abs_ratio > 30.0 {
        gamma.signum() * (std::f64::consts::LN_2 + log_abs_ratio)
    } else {
        (gamma.signum() * log_abs_ratio.exp()).asinh()
    };

    let peak = gamma * mode - omega_cosh(mode);
    // Shifted log density, maximum 0 at the mode.
    let eta = |t: f64| gamma * t - omega_cosh(t) - peak;

    let t_right = solve_eta_drop(&eta, mode, 1.0);
    let t_left = solve_eta_drop(&eta, mode, -1.0);
    // Tangent slopes at the drop points; log-concavity keeps eta below them.
    let slope_right = (gamma - omega_sinh(t_right)).min(-1e-12);
    let slope_left = (gamma - omega_sinh(t_left)).max(1e-12);

    let area_mid = t_right - t_left;
    let area_right = (-1.0f64).exp() / -slope_right;
    let area_left = (-1.0f64).exp() / slope_left;
    let total = area_mid + area_right + area_left;

    for _ in 0..100_000 {
        let u = rng.gen::<f64>() * total;
        let (t, log_hat) = if u < area_mid {
            // u is uniform on [0, area_mid), the width of the center piece.
            (t_left + u, 0.0)
        } else if u < area_mid + area_right {
            let e: f64 = rng.sample(Exp1);
            let t = t_right + e / -slope_right;
            (t, -1.0 + slope_right * (t - t_right))
        } else {
            let e: f64 = rng.sample(Exp1);
            let t = t_left - e / slope_left;
            (t, -1.0 + slope_left * (t - t_left))
        };
        // 1 - gen() lies in (0, 1], keeping the log finite.
        let ln_u: f64 = (1.0 - rng.gen::<f64>()).ln();
        if ln_u <= eta(t) - log_hat {
            let x = (log_scale + t).exp();
            return Ok(x.max(f64::MIN_POSITIVE));
        }
    }
    Err(McmcError::InvalidParameter(format!(
        "GIG rejection sampler failed to accept (gamma={gamma}, rho={rho}, tau={tau})"
    )))
}

/// Find t on the given side of the mode where the shifted log density
/// equals -1 (i.e. the density has dropped by a factor e).
fn solve_eta_drop(eta: &impl Fn(f64) -> f64, mode: f64, direction: f64) -> f64 {
    let mut step = direction;
    let mut hi = mode + step;
    while eta(hi) > -1.0 {
        step *= 2.0;
        hi = mode + step;
    }
    let mut lo = mode;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if eta(mid) > -1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
