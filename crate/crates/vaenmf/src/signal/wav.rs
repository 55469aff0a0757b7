//! Mono WAV (RIFF) reading and writing for PCM16 and IEEE float32.

use std::path::Path;

use super::{SampleBuffer, SignalError};

/// Read a mono PCM16 or float32 WAV file, normalizing samples to [-1, 1].
///
/// Multi-channel files are rejected rather than downmixed.
pub fn read_wav(path: &Path) -> Result<SampleBuffer, SignalError> {
    let reader = hound::WavReader::open(path).map_err(map_hound_err)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(SignalError::Channels(spec.channels));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(map_hound_err)?,
        (hound::SampleFormat::Float, 32) => {
            let raw: Vec<f32> = reader
                .into_samples::<f32>()
                .collect::<Result<_, _>>()
                .map_err(map_hound_err)?;
            let mut clipped = 0usize;
            let out = raw
                .iter()
                .map(|&v| {
                    let v = v as f64;
                    if !v.is_finite() {
                        return f64::NAN; // caught by SampleBuffer::new
                    }
                    if v.abs() > 1.0 {
                        clipped += 1;
                    }
                    v.clamp(-1.0, 1.0)
                })
                .collect();
            if clipped > 0 {
                log::warn!(
                    "{}: {clipped} float samples outside [-1, 1] were clamped",
                    path.display()
                );
            }
            out
        }
        (fmt, bits) => {
            return Err(SignalError::Format(format!(
                "unsupported sample format {fmt:?} with {bits} bits"
            )))
        }
    };
    SampleBuffer::new(samples, spec.sample_rate)
}

/// Write a buffer as mono PCM16. Samples outside [-1, 1] are saturated with
/// a warning.
pub fn write_wav(path: &Path, buffer: &SampleBuffer) -> Result<(), SignalError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(map_hound_err)?;
    let mut clipped = 0usize;
    for &s in buffer.samples() {
        if s.abs() > 1.0 {
            clipped += 1;
        }
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(q).map_err(map_hound_err)?;
    }
    if clipped > 0 {
        log::warn!(
            "{}: {clipped} samples outside [-1, 1] were saturated",
            path.display()
        );
    }
    writer.finalize().map_err(map_hound_err)?;
    Ok(())
}

fn map_hound_err(e: hound::Error) -> SignalError {
    match e {
        hound::Error::IoError(io) => SignalError::Io(io),
        other => SignalError::Format(other.to_string()),
    }
}
