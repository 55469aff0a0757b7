//! Single JSON configuration document with one section per subsystem.
//! Missing sections and fields fall back to defaults; a `--seed` override
//! takes precedence over every section's seed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eval::{NoiseType, SynthConfig};
use crate::mcmc::{McmcConfig, PriorConfig};
use crate::signal::StftConfig;
use crate::vae::TrainConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub stft: StftConfig,
    pub train: TrainConfig,
    pub prior: PriorConfig,
    pub mcmc: McmcConfig,
    pub synth: Vec<SynthConfig>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            train: TrainConfig::default(),
            prior: PriorConfig::default(),
            mcmc: McmcConfig::default(),
            synth: vec![
                SynthConfig {
                    noise_type: NoiseType::LowRankStationary,
                    ..SynthConfig::default()
                },
                SynthConfig {
                    noise_type: NoiseType::Hum,
                    ..SynthConfig::default()
                },
                SynthConfig {
                    noise_type: NoiseType::FilteredNoise,
                    ..SynthConfig::default()
                },
            ],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid JSON in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Force every stochastic component onto one seed.
    pub fn override_seed(&mut self, seed: u64) {
        self.train.seed = seed;
        self.mcmc.seed = seed;
        for synth in &mut self.synth {
            synth.seed = seed;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let cfg: Config = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.stft.window_len, 1024);
        assert_eq!(cfg.stft.hop, 256);
        assert_eq!(cfg.prior.k, 5);
        assert_eq!(cfg.mcmc.burn_in, 100);
        assert_eq!(cfg.mcmc.samples, 50);
        assert_eq!(cfg.synth.len(), 3);
    }

    #[test]
    fn sections_override_individually() {
        let cfg: Config =
            serde_json::from_str(r#"{"mcmc": {"burn_in": 7}, "prior": {"k": 2}}"#).unwrap();
        assert_eq!(cfg.mcmc.burn_in, 7);
        assert_eq!(cfg.mcmc.samples, 50);
        assert_eq!(cfg.prior.k, 2);
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let err = serde_json::from_str::<Config>(r#"{"mcmcc": {}}"#).unwrap_err();
        assert!(err.to_string().contains("mcmcc"));
    }

    #[test]
    fn parse_error_carries_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\n  \"mcmc\": {,}\n}").unwrap();
        match Config::load(&path) {
            Err(ConfigError::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn seed_override_reaches_every_section() {
        let mut cfg = Config::default();
        cfg.override_seed(77);
        assert_eq!(cfg.train.seed, 77);
        assert_eq!(cfg.mcmc.seed, 77);
        assert!(cfg.synth.iter().all(|s| s.seed == 77));
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = Config::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: Config = serde_json::from_str(&text).unwrap();
        assert_eq!(back.prior.a0, cfg.prior.a0);
        assert_eq!(back.synth.len(), cfg.synth.len());
    }
}
