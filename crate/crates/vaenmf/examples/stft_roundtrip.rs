//! Analysis/synthesis round trip: STFT a chirp, invert it, and report the
//! reconstruction error and per-frame energy bookkeeping.
//!
//! ```bash
//! cargo run --release --example stft_roundtrip
//! ```

use vaenmf::signal::{istft, power_spectrogram, stft, SampleBuffer, StftConfig};

fn main() {
    let fs = 16_000u32;
    let samples: Vec<f64> = (0..fs as usize * 2)
        .map(|n| {
            let t = n as f64 / fs as f64;
            0.6 * (std::f64::consts::TAU * (220.0 * t + 800.0 * t * t)).sin()
        })
        .collect();
    let buffer = SampleBuffer::new(samples, fs).unwrap();

    let config = StftConfig::default();
    let spec = stft(&buffer, &config).unwrap();
    println!(
        "spectrogram: {} bins x {} frames (window {}, hop {})",
        spec.freq_bins(),
        spec.frames(),
        config.window_len,
        config.hop
    );

    let power = power_spectrogram(&spec);
    let loudest = (0..power.frames())
        .max_by(|&a, &b| {
            power
                .values
                .column(a)
                .sum()
                .partial_cmp(&power.values.column(b).sum())
                .unwrap()
        })
        .unwrap();
    println!("loudest frame: {loudest}");

    let back = istft(&spec, &config).unwrap();
    let max_err = buffer
        .samples()
        .iter()
        .zip(back.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("round-trip max abs error: {max_err:.3e}");
    assert!(max_err < 1e-10);
}
