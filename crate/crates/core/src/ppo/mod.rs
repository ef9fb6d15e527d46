//! Independent PPO for N fully decentralized agents.
//!
//! The training cycle per update is: [`rollout::collect_rollout`] gathers
//! `horizon × n_envs` transitions per agent under a synchronous message
//! barrier (each agent sees only messages from the previous step), then
//! every agent independently runs [`update::ppo_update`] followed by
//! [`update::update_clustering`]. No gradients, parameters, or optimizer
//! state ever cross agent boundaries; received messages enter the loss as
//! constants.

pub mod buffer;
pub mod gae;
pub mod policy;
pub mod rollout;
pub mod train;
pub mod update;

pub use buffer::RolloutBuffer;
pub use gae::compute_gae;
pub use rollout::{collect_rollout, CommEvent, EnvWorker};
pub use train::{train, CurvePoint, TrainConfig, TrainerRngs, TrainingArtifacts};
pub use update::{ppo_update, update_clustering, UpdateDiagnostics};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// PPO hyperparameters. The defaults are the values used by every preset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoHyper {
    /// Adam learning rate.
    pub lr: f64,
    /// Discount factor γ.
    pub gamma: f64,
    /// GAE parameter λ.
    pub lambda: f64,
    /// Clipped-surrogate radius ε.
    pub clip_eps: f64,
    /// Optimization epochs per collected rollout.
    pub epochs: usize,
    /// Minibatch size within an epoch.
    pub minibatch: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Global gradient-norm clip applied before each Adam step.
    pub max_grad_norm: f64,
    /// Steps collected per parallel environment per update.
    pub horizon: usize,
    /// Parallel environment count.
    pub n_envs: usize,
}

impl Default for PpoHyper {
    fn default() -> Self {
        Self {
            lr: 2.5e-4,
            gamma: 0.99,
            lambda: 0.95,
            clip_eps: 0.2,
            epochs: 4,
            minibatch: 256,
            entropy_coef: 0.01,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            horizon: 256,
            n_envs: 8,
        }
    }
}

impl PpoHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Config(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda must be in [0, 1], got {}", self.lambda)));
        }
        if self.clip_eps <= 0.0 {
            return Err(Error::Config(format!("clip_eps must be positive, got {}", self.clip_eps)));
        }
        for (name, v) in [
            ("epochs", self.epochs),
            ("minibatch", self.minibatch),
            ("horizon", self.horizon),
            ("n_envs", self.n_envs),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.entropy_coef < 0.0 || self.value_coef < 0.0 || self.max_grad_norm <= 0.0 {
            return Err(Error::Config("coefficients must be non-negative and max_grad_norm positive".into()));
        }
        Ok(())
    }

    /// Transitions gathered per update, and the per-agent buffer capacity.
    pub fn steps_per_update(&self) -> usize {
        self.horizon * self.n_envs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PpoHyper::default().validate().unwrap();
    }

    #[test]
    fn bad_values_are_rejected() {
        for patch in [
            |h: &mut PpoHyper| h.gamma = 0.0,
            |h: &mut PpoHyper| h.gamma = 1.5,
            |h: &mut PpoHyper| h.lambda = -0.1,
            |h: &mut PpoHyper| h.clip_eps = 0.0,
            |h: &mut PpoHyper| h.epochs = 0,
            |h: &mut PpoHyper| h.minibatch = 0,
            |h: &mut PpoHyper| h.horizon = 0,
            |h: &mut PpoHyper| h.n_envs = 0,
            |h: &mut PpoHyper| h.lr = f64::NAN,
            |h: &mut PpoHyper| h.max_grad_norm = 0.0,
        ] {
            let mut h = PpoHyper::default();
            patch(&mut h);
            assert!(h.validate().is_err(), "{h:?}");
        }
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let h: PpoHyper = toml::from_str("gamma = 0.9\nhorizon = 16\n").unwrap();
        assert_eq!(h.gamma, 0.9);
        assert_eq!(h.horizon, 16);
        assert_eq!(h.minibatch, PpoHyper::default().minibatch);
    }
}
