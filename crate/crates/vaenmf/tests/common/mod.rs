//! Shared test oracles, independent of the library's inference paths.

#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use vaenmf::mcmc::SpeechPrior;
use vaenmf::vae::VaeError;

/// Speech prior that ignores its latent: sigma_s is a fixed vector.
pub struct ConstantPrior {
    pub sigma: Array1<f64>,
    pub latent_dim: usize,
}

impl SpeechPrior for ConstantPrior {
    fn latent_dim(&self) -> usize {
        self.latent_dim
    }
    fn freq_bins(&self) -> usize {
        self.sigma.len()
    }
    fn speech_variance(&self, _z: ArrayView1<f64>) -> Result<Array1<f64>, VaeError> {
        Ok(self.sigma.clone())
    }
}

/// Frozen affine decoder over a scalar latent, floored to stay positive:
/// sigma_f(z) = max(base_f + slope_f * z, floor).
pub struct LinearPrior {
    pub base: Array1<f64>,
    pub slope: Array1<f64>,
    pub floor: f64,
}

impl LinearPrior {
    pub fn sigma_at(&self, z: f64) -> Array1<f64> {
        Array1::from_shape_fn(self.base.len(), |f| {
            (self.base[f] + self.slope[f] * z).max(self.floor)
        })
    }
}

impl SpeechPrior for LinearPrior {
    fn latent_dim(&self) -> usize {
        1
    }
    fn freq_bins(&self) -> usize {
        self.base.len()
    }
    fn speech_variance(&self, z: ArrayView1<f64>) -> Result<Array1<f64>, VaeError> {
        Ok(self.sigma_at(z[0]))
    }
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> (f64, f64) {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let sign = if k % 2 == 1 { 2.0 } else { -2.0 };
        p += sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
    }
    (d, p.clamp(0.0, 1.0))
}

/// GIG mean oracle by Simpson quadrature on the log-transformed density
/// exp(gamma t - omega cosh t); independent of the sampler.
pub fn gig_quadrature_mean(gamma: f64, rho: f64, tau: f64) -> f64 {
    let scale = (tau / rho).sqrt();
    let omega = 2.0 * (rho * tau).sqrt();
    let mode = (gamma / omega).asinh();
    let peak = gamma * mode - omega * mode.cosh();
    let g = |t: f64| (gamma * t - omega * t.cosh() - peak).exp();
    let mut half = 1.0;
    while g(mode + half) > 1e-18 || g(mode - half) > 1e-18 {
        half *= 1.5;
    }
    let (a, b) = (mode - half, mode + half);
    let n = 200_001;
    let h = (b - a) / (n - 1) as f64;
    let mut zeroth = 0.0;
    let mut first = 0.0;
    for i in 0..n {
        let t = a + i as f64 * h;
        let w = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let val = w * g(t);
        zeroth += val;
        first += val * t.exp();
    }
    scale * first / zeroth
}

/// Multiplicative-update Itakura-Saito NMF fit (Fevotte-style), used as an
/// independent low-rank oracle.
pub fn is_nmf_fit<R: Rng>(
    v: ArrayView2<f64>,
    rank: usize,
    iterations: usize,
    rng: &mut R,
) -> (Array2<f64>, Array2<f64>) {
    let (f, t) = v.dim();
    let floor: f64 = 1e-12;
    let mut w: Array2<f64> = Array2::from_shape_fn((f, rank), |_| rng.gen_range(0.5..1.5));
    let mut h: Array2<f64> = Array2::from_shape_fn((rank, t), |_| rng.gen_range(0.5..1.5));
    for _ in 0..iterations {
        let wh = w.dot(&h).mapv(|x| x.max(floor));
        let wh1 = wh.mapv(|x| 1.0 / x);
        let wh2v = &wh1 * &wh1 * &v;
        let num = w.t().dot(&wh2v);
        let den = w.t().dot(&wh1).mapv(|x| x.max(floor));
        h = &h * &(num / den);
        h.mapv_inplace(|x| x.max(floor));

        let wh = w.dot(&h).mapv(|x| x.max(floor));
        let wh1 = wh.mapv(|x| 1.0 / x);
        let wh2v = &wh1 * &wh1 * &v;
        let num = wh2v.dot(&h.t());
        let den = wh1.dot(&h.t()).mapv(|x| x.max(floor));
        w = &w * &(num / den);
        w.mapv_inplace(|x| x.max(floor));
    }
    (w, h)
}

/// Exact posterior means of the noise basis and activations on the
/// (F, T, K, D) = (2, 2, 1, 1) instance with a frozen `LinearPrior`, by
/// brute-force quadrature: the latent of each frame is integrated on a
/// z-grid inside a (w1, w2) x (h, z) tensor-grid evaluation.
///
/// Priors: w_f ~ Gamma(a0, b0), h_t ~ Gamma(a1, b1), z_t ~ N(0, 1);
/// likelihood per bin: Exp(p_ft; w_f h_t + sigma_f(z_t)).
pub struct TinyPosterior {
    pub mean_w: [f64; 2],
    pub mean_h: [f64; 2],
}

pub fn tiny_posterior_quadrature(
    power: &Array2<f64>,
    a0: f64,
    b0: f64,
    a1: f64,
    b1: f64,
    prior: &LinearPrior,
) -> TinyPosterior {
    assert_eq!(power.dim(), (2, 2));
    let n_w = 280;
    let w_max = 14.0;
    let n_h = 240;
    let h_max = 12.0;
    let n_z = 81;
    let z_half = 6.0;

    let w_grid: Vec<f64> = (0..n_w).map(|i| (i as f64 + 0.5) * w_max / n_w as f64).collect();
    let h_grid: Vec<f64> = (0..n_h).map(|i| (i as f64 + 0.5) * h_max / n_h as f64).collect();
    let z_grid: Vec<f64> = (0..n_z)
        .map(|i| -z_half + i as f64 * (2.0 * z_half) / (n_z - 1) as f64)
        .collect();

    let log_gamma_prior = |x: f64, a: f64, b: f64| (a - 1.0) * x.ln() - b * x;
    let w_prior: Vec<f64> = w_grid.iter().map(|&w| log_gamma_prior(w, a0, b0)).collect();

    // Joint (h, z) weights per frame: prior only; shared across bins.
    let hz = n_h * n_z;
    let mut hz_weight = Array1::<f64>::zeros(hz);
    for (ih, &h) in h_grid.iter().enumerate() {
        for (iz, &z) in z_grid.iter().enumerate() {
            hz_weight[ih * n_z + iz] = (log_gamma_prior(h, a1, b1) - 0.5 * z * z).exp();
        }
    }

    // Per frame t and bin f, the likelihood table over (w_f, (h, z)).
    let like_table = |f: usize, t: usize| -> Array2<f64> {
        let p = power[[f, t]];
        let mut table = Array2::<f64>::zeros((n_w, hz));
        for (iw, &w) in w_grid.iter().enumerate() {
            for (ih, &h) in h_grid.iter().enumerate() {
                for (iz, &z) in z_grid.iter().enumerate() {
                    let sigma = (prior.base[f] + prior.slope[f] * z).max(prior.floor);
                    let lambda = w * h + sigma;
                    table[[iw, ih * n_z + iz]] = (-lambda.ln() - p / lambda).exp();
                }
            }
        }
        table
    };

    // For each frame t, inner sums over (h, z) against both bins' tables:
    // U_t[w1, w2] = sum_hz q(h,z) T0[w1, hz] T1[w2, hz], plus the h-weighted
    // version V_t for activation means.
    let mut u = Vec::with_capacity(2);
    let mut v_h = Vec::with_capacity(2);
    for t in 0..2 {
        let t0 = like_table(0, t);
        let t1 = like_table(1, t);
        let mut t0q = t0.clone();
        let mut t0qh = t0;
        for (col, &q) in hz_weight.iter().enumerate() {
            let h_val = h_grid[col / n_z];
            for iw in 0..n_w {
                let base = t0q[[iw, col]];
                t0q[[iw, col]] = base * q;
                t0qh[[iw, col]] = base * q * h_val;
            }
        }
        u.push(t0q.dot(&t1.t()));
        v_h.push(t0qh.dot(&t1.t()));
    }

    // Combine with the w priors.
    let mut z_norm = 0.0;
    let mut num_w1 = 0.0;
    let mut num_w2 = 0.0;
    let mut num_h = [0.0f64; 2];
    for iw1 in 0..n_w {
        for iw2 in 0..n_w {
            let pw = (w_prior[iw1] + w_prior[iw2]).exp();
            let joint = pw * u[0][[iw1, iw2]] * u[1][[iw1, iw2]];
            z_norm += joint;
            num_w1 += joint * w_grid[iw1];
            num_w2 += joint * w_grid[iw2];
            num_h[0] += pw * v_h[0][[iw1, iw2]] * u[1][[iw1, iw2]];
            num_h[1] += pw * u[0][[iw1, iw2]] * v_h[1][[iw1, iw2]];
        }
    }

    TinyPosterior {
        mean_w: [num_w1 / z_norm, num_w2 / z_norm],
        mean_h: [num_h[0] / z_norm, num_h[1] / z_norm],
    }
}
