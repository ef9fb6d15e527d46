//! TOML experiment configuration.
//!
//! ```toml
//! [experiment]
//! name = "closedrooms-cluster-desk"
//! seeds = [1, 2, 3]
//! total_steps = 500000
//!
//! [env]
//! kind = "closed-rooms"
//!
//! [comm]
//! variant = "cluster-comm"
//!
//! [ppo]
//! horizon = 256
//! ```
//!
//! Every omitted key falls back to its documented default; `comm.k` falls
//! back to the environment's vocabulary size.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::comm::CommVariant;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::ppo::{PpoHyper, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSection {
    pub name: String,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub total_steps: usize,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default = "default_snapshot_episodes")]
    pub snapshot_episodes: usize,
    /// Output root; the CLI's `--out` flag overrides it.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}
fn default_eval_episodes() -> usize {
    1000
}
fn default_snapshot_every() -> usize {
    25_600
}
fn default_snapshot_episodes() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommSection {
    pub variant: CommVariant,
    /// Vocabulary size; `None` uses the environment default (8 for
    /// Bottleneck/ClosedRooms, 16 for RedBlueDoors/Foraging).
    #[serde(default)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub env: EnvConfig,
    pub comm: CommSection,
    #[serde(default)]
    pub ppo: PpoHyper,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.name.is_empty() {
            return Err(Error::Config("experiment name must not be empty".into()));
        }
        if self.experiment.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut sorted = self.experiment.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.experiment.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        self.env.validate()?;
        if self.k() < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k())));
        }
        self.ppo.validate()?;
        if self.experiment.eval_episodes == 0 {
            return Err(Error::Config("eval_episodes must be positive".into()));
        }
        Ok(())
    }

    /// Resolved vocabulary size.
    pub fn k(&self) -> usize {
        self.comm.k.unwrap_or_else(|| self.env.kind.default_k())
    }

    /// The single-seed training slice of this experiment.
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            env: self.env.clone(),
            variant: self.comm.variant,
            k: self.k(),
            hyper: self.ppo,
            total_steps: self.experiment.total_steps,
            snapshot_every: self.experiment.snapshot_every,
            snapshot_episodes: self.experiment.snapshot_episodes,
            master_seed: seed,
        }
    }

    /// Content hash over everything that shapes per-seed artifacts (not
    /// the name, seed list, or output directory). Keys idempotent reuse.
    pub fn content_hash(&self) -> String {
        #[derive(Serialize)]
        struct Identity<'a> {
            env: &'a EnvConfig,
            variant: CommVariant,
            k: usize,
            ppo: &'a PpoHyper,
            total_steps: usize,
            snapshot_every: usize,
            snapshot_episodes: usize,
            eval_episodes: usize,
        }
        let identity = Identity {
            env: &self.env,
            variant: self.comm.variant,
            k: self.k(),
            ppo: &self.ppo,
            total_steps: self.experiment.total_steps,
            snapshot_every: self.experiment.snapshot_every,
            snapshot_episodes: self.experiment.snapshot_episodes,
            eval_episodes: self.experiment.eval_episodes,
        };
        let json = serde_json::to_string(&identity).expect("identity serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// First 8 hex digits of [`Self::content_hash`], used in file names.
    pub fn short_hash(&self) -> String {
        self.content_hash()[..8].to_string()
    }
}
