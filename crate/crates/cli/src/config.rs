use std::path::Path;

use anyhow::{Context, Result};
use histnorm::normalizer::TrainConfig;
use serde::{Deserialize, Serialize};

/// Settings shared by every command. Command-line flags override values
/// read from a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Seed for any randomized step; the current backends are deterministic.
    pub seed: u64,
    /// Worker threads; 0 uses one per core.
    pub threads: usize,
    /// 0 warnings, 1 info, 2 debug, 3 and above trace.
    pub verbosity: u8,
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        RunConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use histnorm::normalizer::Component;

    #[test]
    fn toml_roundtrip() {
        let mut c = RunConfig {
            seed: 42,
            threads: 3,
            verbosity: 2,
            ..RunConfig::default()
        };
        c.train.channel.beam_width = 25;
        c.train.channel.lm_weight = 0.75;
        c.train.distance.threshold = 0.3;
        c.train.chain.components = vec![Component::Lookup, Component::Distance];
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
        assert_eq!(
            RunConfig::from_toml(&RunConfig::default().to_toml().unwrap()).unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn partial_files_fill_defaults() {
        let c = RunConfig::from_toml("seed = 7\n[train.channel]\nbeam_width = 4\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.train.channel.beam_width, 4);
        assert_eq!(
            c.train.channel.lm_order,
            TrainConfig::default().channel.lm_order
        );
        assert_eq!(c.train.distance, TrainConfig::default().distance);
    }

    #[test]
    fn mistyped_values_are_rejected() {
        assert!(RunConfig::from_toml("seed = \"x\"").is_err());
    }
}
