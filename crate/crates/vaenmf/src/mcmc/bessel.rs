//! Log modified Bessel function of the second kind, used for GIG
//! normalizing constants in the Metropolis-Hastings acceptance ratios.

/// ln K_nu(z) for z > 0, by log-domain Simpson quadrature of the integral
/// representation K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt.
/// The integrand is unimodal in t, so the quadrature range is located by
/// a ternary search for the peak plus a bisection for the decayed tail.
pub(crate) fn log_bessel_k(nu: f64, z: f64) -> f64 {
    assert!(z > 0.0 && z.is_finite(), "log_bessel_k needs z > 0, got {z}");
    let nu = nu.abs(); // K_{-nu} = K_nu
    let g = |t: f64| -z * t.cosh() + ln_cosh(nu * t);

    // Peak: g'(t) = -z sinh t + nu tanh(nu t) changes sign at most once.
    let dg = |t: f64| -z * t.sinh() + nu * (nu * t).tanh();
    let t_peak = if dg(1e-12) <= 0.0 {
        0.0
    } else {
        let mut hi = 1.0;
        while dg(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dg(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let g_peak = g(t_peak);

    // Right edge where the integrand has dropped ~e^-45 below the peak.
    let mut t_hi = t_peak + 1.0;
    while g(t_hi) > g_peak - 45.0 {
        t_hi = t_peak + (t_hi - t_peak) * 2.0;
    }

    // Simpson in the log domain over [0, t_hi], ~40 nodes per unit of t.
    let n = ((t_hi * 40.0) as usize).clamp(500, 20_000) | 1;
    let h = t_hi / (n - 1) as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * (g(i as f64 * h) - g_peak).exp();
    }
    g_peak + (sum * h / 3.0).ln()
}

// Stable ln cosh(x).
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}
