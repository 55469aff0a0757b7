//! Draw from the generalized-inverse-Gaussian and Gamma samplers and
//! compare empirical means against known values.
//!
//! ```bash
//! cargo run --release --example gig_sampler_moments
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vaenmf::mcmc::{sample_gamma, sample_gig};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 200_000;

    // Inverse-Gaussian order: E[X] = sqrt(tau/rho) exactly.
    let (rho, tau) = (2.0, 3.0);
    let mean: f64 = (0..n)
        .map(|_| sample_gig(-0.5, rho, tau, &mut rng).unwrap())
        .sum::<f64>()
        / n as f64;
    println!(
        "GIG(-1/2, {rho}, {tau}): mean {mean:.4}, closed form {:.4}",
        (tau / rho).sqrt()
    );

    // tau = 0 reduces to Gamma(shape, rate) with mean shape/rate.
    let (shape, rate) = (2.5, 1.5);
    let gig_mean: f64 = (0..n)
        .map(|_| sample_gig(shape, rate, 0.0, &mut rng).unwrap())
        .sum::<f64>()
        / n as f64;
    let gamma_mean: f64 = (0..n)
        .map(|_| sample_gamma(shape, rate, &mut rng).unwrap())
        .sum::<f64>()
        / n as f64;
    println!(
        "GIG({shape}, {rate}, 0) mean {gig_mean:.4} vs Gamma({shape}, {rate}) mean {gamma_mean:.4} (exact {:.4})",
        shape / rate
    );

    // A regime the enhancement chain actually visits.
    let draws: Vec<f64> = (0..n)
        .map(|_| sample_gig(1.0, 1.5, 0.8, &mut rng).unwrap())
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    println!("GIG(1, 1.5, 0.8): mean {mean:.4}, variance {var:.4}, all positive");
    assert!(draws.iter().all(|&x| x > 0.0));
}
