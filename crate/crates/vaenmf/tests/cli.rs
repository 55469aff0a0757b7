//! Exit-code and error-path checks for the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vaenmf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const TINY_CONFIG: &str = r#"{
  "train": { "epochs": 1, "minibatch_frames": 16, "latent_dim": 2, "hidden_dims": [4], "seed": 1 },
  "mcmc": { "burn_in": 1, "samples": 1, "seed": 1 },
  "synth": [ { "utterance_count": 1, "duration_s": 0.3, "noise_type": "filtered-noise", "seed": 1 } ]
}"#;

#[test]
fn empty_corpus_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("config.json"), TINY_CONFIG).unwrap();
    std::fs::create_dir(tmp.path().join("empty")).unwrap();
    let out = run(
        &["train", "--corpus", "empty", "--config", "config.json", "--out", "m.bin"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(stderr_of(&out).contains("empty corpus"), "{out:?}");
}

#[test]
fn missing_model_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("config.json"), TINY_CONFIG).unwrap();
    std::fs::write(tmp.path().join("noisy.wav"), b"not really").unwrap();
    let out = run(
        &["enhance", "--model", "absent.bin", "--in", "noisy.wav", "--out", "e.wav"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(stderr_of(&out).contains("does not exist"));
}

#[test]
fn bad_json_exits_2_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.json"), "{\n  \"mcmc\": [1,\n}").unwrap();
    let out = run(
        &["eval", "--model", "m.bin", "--config", "bad.json", "--report", "r.csv"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let err = stderr_of(&out);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn stereo_input_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("config.json"), TINY_CONFIG).unwrap();

    // A valid model file so the failure is attributable to the input WAV.
    synth_and_train(tmp.path());

    let spec = hound::WavSpec {
        channels: 2,
        sample_rate: 16000,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(tmp.path().join("stereo.wav"), spec).unwrap();
    for _ in 0..8192 {
        w.write_sample(0i16).unwrap();
        w.write_sample(0i16).unwrap();
    }
    w.finalize().unwrap();

    let out = run(
        &[
            "enhance", "--model", "m.bin", "--in", "stereo.wav", "--out", "e.wav",
            "--config", "config.json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    assert!(stderr_of(&out).contains("channels"));
}

#[test]
fn model_stft_mismatch_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("config.json"), TINY_CONFIG).unwrap();
    synth_and_train(tmp.path());

    // Same model, different analysis window via a second config.
    std::fs::write(
        tmp.path().join("other.json"),
        r#"{ "stft": { "window_len": 512, "hop": 128 }, "mcmc": { "burn_in": 1, "samples": 1 } }"#,
    )
    .unwrap();
    let out = run(
        &[
            "enhance", "--model", "m.bin", "--in", "mix.wav", "--out", "e.wav",
            "--config", "other.json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    assert!(stderr_of(&out).contains("frequency bins"));
}

#[test]
fn non_16k_input_warns_but_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("config.json"), TINY_CONFIG).unwrap();
    synth_and_train(tmp.path());

    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: 8000,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(tmp.path().join("slow.wav"), spec).unwrap();
    for n in 0..8192 {
        let v = (0.3 * (std::f64::consts::TAU * 300.0 * n as f64 / 8000.0).sin() * 32767.0) as i16;
        w.write_sample(v).unwrap();
    }
    w.finalize().unwrap();

    let out = run(
        &[
            "enhance", "--model", "m.bin", "--in", "slow.wav", "--out", "e.wav",
            "--config", "config.json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stderr_of(&out).contains("16 kHz"), "expected rate warning");
    assert!(tmp.path().join("e.wav").is_file());
}

#[test]
fn corrupt_model_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("config.json"), TINY_CONFIG).unwrap();
    synth_and_train(tmp.path());
    let bytes = std::fs::read(tmp.path().join("m.bin")).unwrap();
    std::fs::write(tmp.path().join("m.bin"), &bytes[..bytes.len() / 3]).unwrap();
    let out = run(
        &[
            "enhance", "--model", "m.bin", "--in", "mix.wav", "--out", "e.wav",
            "--config", "config.json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    assert!(stderr_of(&out).contains("truncated"));
}

// Produce corpus + mixture + trained model inside `dir`.
fn synth_and_train(dir: &Path) {
    let out = run(
        &["synth", "--config", "config.json", "--out", "synth"],
        dir,
    );
    assert!(out.status.success(), "{out:?}");
    std::fs::create_dir_all(dir.join("corpus")).unwrap();
    std::fs::copy(
        dir.join("synth/filtered-noise-000-speech.wav"),
        dir.join("corpus/utt.wav"),
    )
    .unwrap();
    std::fs::copy(
        dir.join("synth/filtered-noise-000-mixture.wav"),
        dir.join("mix.wav"),
    )
    .unwrap();
    let out = run(
        &["train", "--corpus", "corpus", "--config", "config.json", "--out", "m.bin"],
        dir,
    );
    assert!(out.status.success(), "{out:?}");
}
