use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::AgentConfig;
use crate::sim::GenerationParams;

/// Everything a suite run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub episode_count: usize,
    /// Label of the table row.
    pub method: String,
    pub out_dir: PathBuf,
    /// Write map snapshots every this many steps; 0 disables them.
    pub snapshot_period: usize,
    /// Worker threads for episode-level parallelism; 0 uses all cores.
    pub parallel: usize,
    pub world: GenerationParams,
    pub agent: AgentConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            episode_count: 100,
            method: "goalnav".into(),
            out_dir: PathBuf::from("runs/default"),
            snapshot_period: 0,
            parallel: 1,
            world: GenerationParams::default(),
            agent: AgentConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episode_count == 0 {
            return Err(Error::Config("episode_count must be at least 1".into()));
        }
        self.world
            .validate()
            .map_err(|e| Error::Config(format!("world: {e}")))?;
        self.agent
            .validate()
            .map_err(|e| Error::Config(format!("agent: {e}")))?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn episode_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            RunConfig::from_toml("seed = 1\nbogus = 2\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_toml("[agent]\nmap_sise = 3\n"),
            Err(Error::Config(_))
        ));
        assert!(RunConfig::from_toml("seed = 4\n[world]\nwidth_m = 20.0\n").is_ok());
    }

    #[test]
    fn zero_episodes_rejected() {
        assert!(RunConfig::from_toml("episode_count = 0\n").is_err());
    }
}
