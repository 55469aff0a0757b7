//! Forward/inverse short-time Fourier transform with perfect reconstruction.
//!
//! Analysis uses a periodic Hann window and reflect padding of
//! `window_len / 2` at both ends so frame `t` is centered on sample
//! `t * hop`. Synthesis is weighted overlap-add normalized by the
//! squared-window sum, then trimmed back to the original signal length.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{hann_window, ComplexSpectrogram, SampleBuffer, SignalError, StftConfig};

/// Compute the one-sided complex spectrogram of `buffer`.
pub fn stft(buffer: &SampleBuffer, config: &StftConfig) -> Result<ComplexSpectrogram, SignalError> {
    config.validate()?;
    let n = config.window_len;
    let hop = config.hop;
    if buffer.len() < n {
        return Err(SignalError::TooShort {
            len: buffer.len(),
            min: n,
        });
    }

    let padded = reflect_pad(buffer.samples(), n / 2, hop);
    let frames = (padded.len() - n) / hop + 1;
    let window = hann_window(n);
    let bins = n / 2 + 1;

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); n];

    let mut out = Array2::from_elem((bins, frames), Complex64::default());
    for t in 0..frames {
        let start = t * hop;
        for i in 0..n {
            buf[i] = Complex64::new(padded[start + i] * window[i], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for f in 0..bins {
            out[[f, t]] = buf[f];
        }
    }

    Ok(ComplexSpectrogram {
        bins: out,
        window_len: n,
        hop,
        sample_rate: buffer.sample_rate(),
        signal_len: buffer.len(),
    })
}

/// Invert a spectrogram produced by `stft` with the same config.
pub fn istft(spec: &ComplexSpectrogram, config: &StftConfig) -> Result<SampleBuffer, SignalError> {
    config.validate()?;
    if spec.window_len != config.window_len || spec.hop != config.hop {
        return Err(SignalError::ConfigMismatch {
            win: spec.window_len,
            hop: spec.hop,
            cfg_win: config.window_len,
            cfg_hop: config.hop,
        });
    }
    let n = config.window_len;
    let hop = config.hop;
    let bins = n / 2 + 1;
    if spec.freq_bins() != bins {
        return Err(SignalError::Config(format!(
            "spectrogram has {} bins, config implies {}",
            spec.freq_bins(),
            bins
        )));
    }

    let frames = spec.frames();
    let padded_len = (frames - 1) * hop + n;
    let window = hann_window(n);

    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); n];

    let mut num = vec![0.0f64; padded_len];
    let mut den = vec![0.0f64; padded_len];
    for t in 0..frames {
        // Rebuild the full spectrum from the one-sided half (real signal).
        for f in 0..bins {
            buf[f] = spec.bins[[f, t]];
        }
        for f in bins..n {
            buf[f] = spec.bins[[n - f, t]].conj();
        }
        ifft.process_with_scratch(&mut buf, &mut scratch);
        let start = t * hop;
        for i in 0..n {
            // rustfft leaves the inverse unnormalized.
            let sample = buf[i].re / n as f64;
            num[start + i] += sample * window[i];
            den[start + i] += window[i] * window[i];
        }
    }

    let pad = n / 2;
    let out_len = spec.signal_len.min(padded_len.saturating_sub(pad));
    let mut samples = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let d = den[pad + i];
        samples.push(if d > 1e-12 { num[pad + i] / d } else { 0.0 });
    }
    SampleBuffer::new(samples, spec.sample_rate)
}

/// Reflect-pad by `pad` on the left and by at least `pad` on the right,
/// extending the right side so the padded length lands on a whole number of
/// hops past the first frame.
fn reflect_pad(x: &[f64], pad: usize, hop: usize) -> Vec<f64> {
    let n = x.len();
    let base_len = n + 2 * pad;
    let win = 2 * pad;
    let extra = (hop - (base_len - win) % hop) % hop;
    let total = base_len + extra;

    let mut out = Vec::with_capacity(total);
    for i in 0..pad {
        out.push(x[reflect_index(pad - i, n)]);
    }
    out.extend_from_slice(x);
    for i in 0..pad + extra {
        out.push(x[reflect_index(n + i, n)]);
    }
    debug_assert_eq!(out.len(), total);
    out
}

// Mirror an out-of-range offset back into [0, n): reflection without edge
// repetition, wrapping for pads longer than the signal.
fn reflect_index(i: usize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let j = i % period;
    if j < n {
        j
    } else {
        period - j
    }
}
