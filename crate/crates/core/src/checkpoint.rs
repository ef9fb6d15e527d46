//! Versioned JSON checkpoints of trained teams.
//!
//! A checkpoint stores everything needed to re-evaluate or inspect a
//! training run: the exact [`TrainConfig`], the trained [`Team`], the
//! learning curve, and the terminal RNG states. An integrity hash over
//! the team parameters catches hand-edited or truncated files at load.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::Team;
use crate::comm::CommVariant;
use crate::env::EnvKind;
use crate::error::{Error, Result};
use crate::ppo::{CurvePoint, TrainConfig, TrainerRngs, TrainingArtifacts};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: TrainConfig,
    /// Environment steps actually consumed by training.
    pub env_steps: usize,
    pub curve: Vec<CurvePoint>,
    pub team: Team,
    /// RNG states at the end of training (bit-exact resume/replay).
    pub rngs: TrainerRngs,
    /// SHA-256 over the serialized team; verified on load.
    pub team_hash: String,
}

fn team_hash(team: &Team) -> Result<String> {
    let bytes = serde_json::to_vec(team)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

impl Checkpoint {
    pub fn from_training(config: &TrainConfig, artifacts: &TrainingArtifacts) -> Self {
        let hash = team_hash(&artifacts.team).expect("team serializes");
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config: config.clone(),
            env_steps: artifacts.env_steps,
            curve: artifacts.curve.clone(),
            team: artifacts.team.clone(),
            rngs: artifacts.rngs.clone(),
            team_hash: hash,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let ckpt: Checkpoint = serde_json::from_slice(&bytes)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {})",
                ckpt.version, CHECKPOINT_VERSION
            )));
        }
        let actual = team_hash(&ckpt.team)?;
        if actual != ckpt.team_hash {
            return Err(Error::Checkpoint(format!(
                "team hash mismatch in {} (file corrupted or edited)",
                path.display()
            )));
        }
        Ok(ckpt)
    }

    /// Rejects evaluation requests that contradict what was trained.
    pub fn ensure_matches(
        &self,
        env: Option<EnvKind>,
        variant: Option<CommVariant>,
    ) -> Result<()> {
        if let Some(kind) = env {
            if kind != self.config.env.kind {
                return Err(Error::Checkpoint(format!(
                    "checkpoint was trained on {} but evaluation requested {}",
                    self.config.env.kind, kind
                )));
            }
        }
        if let Some(v) = variant {
            if v != self.config.variant {
                return Err(Error::Checkpoint(format!(
                    "checkpoint holds a {} team but evaluation requested {}",
                    self.config.variant, v
                )));
            }
        }
        Ok(())
    }
}
