//! TOML run configuration.
//!
//! ```toml
//! [experiment]
//! n_participants = 83
//! replicates = 10
//!
//! [models]
//! static = "static_model.txt"      # flat-text model records,
//! population = "population.txt"    # relative to this file
//! ```
//!
//! `[models] prior_study = true` instead pre-trains both models on a
//! synthetic prior study drawn from the configured population.

use crate::error::{CliError, CliResult};
use receptive_jitai::ExperimentConfig;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsConfig {
    #[serde(rename = "static")]
    pub static_model: Option<PathBuf>,
    pub population: Option<PathBuf>,
    #[serde(default)]
    pub prior_study: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub models: ModelsConfig,
}

/// A parsed config plus the bytes it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub bytes: Vec<u8>,
    /// Directory relative model paths resolve against.
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn parse(bytes: Vec<u8>, base_dir: PathBuf) -> CliResult<Self> {
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| CliError::Usage(format!("config is not UTF-8: {e}")))?;
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        config.experiment.validate()?;
        Ok(Self {
            config,
            bytes,
            base_dir,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let bytes =
            std::fs::read(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(bytes, base)
    }

    /// Defaults, with the canonical empty document as the hashed bytes.
    pub fn defaults() -> Self {
        Self {
            config: RunConfig::default(),
            bytes: Vec::new(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn hash(&self) -> String {
        sha256_hex(&self.bytes)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<LoadedConfig> {
        LoadedConfig::parse(text.as_bytes().to_vec(), PathBuf::from("/cfg"))
    }

    #[test]
    fn partial_tables_fill_defaults() {
        let c = parse("[experiment]\nn_participants = 2\n").unwrap();
        assert_eq!(c.config.experiment.n_participants, 2);
        assert_eq!(
            c.config.experiment.study_days,
            ExperimentConfig::default().study_days
        );
        assert_eq!(c.config.models, ModelsConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse("[experiment]\nn_particpants = 2\n").unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
        assert!(err.to_string().contains("n_particpants"), "{err}");
        let err = parse("[model]\n").unwrap_err();
        assert!(err.to_string().contains("model"), "{err}");
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let err = parse("[experiment]\nwarm_up_days = 30\n").unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::USAGE);
    }

    #[test]
    fn hash_tracks_bytes() {
        let a = parse("[experiment]\nseed = 1\n").unwrap();
        let b = parse("[experiment]\nseed = 1\n\n").unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(
            LoadedConfig::defaults().hash(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn relative_model_paths_resolve_against_config_dir() {
        let c = parse("[models]\nstatic = \"m.txt\"\n").unwrap();
        let p = c.config.models.static_model.as_ref().unwrap();
        assert_eq!(c.resolve(p), PathBuf::from("/cfg/m.txt"));
        assert_eq!(c.resolve(Path::new("/abs.txt")), PathBuf::from("/abs.txt"));
    }
}
