//! The update cycle: collect → per-agent PPO update → per-agent centroid
//! refresh, with periodic evaluation snapshots.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::Team;
use crate::comm::CommVariant;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::harness::eval::{evaluate_team, EvalOptions};
use crate::ppo::rollout::{collect_rollout, EnvWorker};
use crate::ppo::update::{ppo_update, update_clustering, UpdateDiagnostics};
use crate::ppo::PpoHyper;
use crate::rng::{stream_rng, Stream};

/// Everything a single training run (one seed) needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub env: EnvConfig,
    pub variant: CommVariant,
    /// Message vocabulary size for clustering variants.
    pub k: usize,
    pub hyper: PpoHyper,
    /// Environment-step budget; training stops before exceeding it.
    pub total_steps: usize,
    /// Environment steps between learning-curve snapshots.
    pub snapshot_every: usize,
    /// Evaluation episodes per snapshot.
    pub snapshot_episodes: usize,
    pub master_seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.hyper.validate()?;
        if self.k < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k)));
        }
        if self.snapshot_every == 0 || self.snapshot_episodes == 0 {
            return Err(Error::Config(
                "snapshot_every and snapshot_episodes must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One learning-curve sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub env_steps: usize,
    pub avg_reward: f64,
    pub success_rate: f64,
    pub avg_steps: f64,
}

/// RNG states at the end of training, for bit-exact checkpointing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerRngs {
    pub action: Vec<ChaCha8Rng>,
    pub shuffle: Vec<ChaCha8Rng>,
    pub clustering: Vec<ChaCha8Rng>,
    pub env_workers: Vec<ChaCha8Rng>,
}

#[derive(Debug, Clone)]
pub struct TrainingArtifacts {
    pub curve: Vec<CurvePoint>,
    pub team: Team,
    /// Environment steps actually consumed (whole updates only).
    pub env_steps: usize,
    /// Diagnostics of each agent's most recent update, if any ran.
    pub last_diagnostics: Vec<UpdateDiagnostics>,
    /// Updates aborted on non-finite losses (their minibatch was skipped).
    pub aborted_updates: usize,
    pub rngs: TrainerRngs,
}

/// Trains one team from scratch under `cfg`. The budget is consumed in
/// whole updates of `horizon × n_envs` steps; a budget smaller than one
/// update (or a non-trainable variant) yields the initial parameters and
/// an empty curve.
pub fn train(cfg: &TrainConfig) -> Result<TrainingArtifacts> {
    cfg.validate()?;
    let mut team = Team::new(&cfg.env, cfg.variant, cfg.k, cfg.hyper.lr, cfg.master_seed)?;
    let n = team.n_agents();
    let mut workers: Vec<EnvWorker> = (0..cfg.hyper.n_envs)
        .map(|e| EnvWorker::new(&cfg.env, cfg.master_seed, e))
        .collect::<Result<_>>()?;
    let mut action_rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|i| stream_rng(cfg.master_seed, Stream::ActionSampling(i)))
        .collect();
    let mut shuffle_rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|i| stream_rng(cfg.master_seed, Stream::Shuffle(i)))
        .collect();
    let mut clustering_rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|i| stream_rng(cfg.master_seed, Stream::Clustering(i)))
        .collect();

    let mut curve = Vec::new();
    let mut last_diagnostics = Vec::new();
    let mut aborted_updates = 0;
    let mut env_steps = 0usize;
    let mut snapshots = 0u64;
    let mut next_snapshot_at = cfg.snapshot_every;
    let per_update = cfg.hyper.steps_per_update();

    let snapshot = |team: &Team, env_steps: usize, snapshots: &mut u64| -> Result<CurvePoint> {
        let base = *snapshots * 1_000_000;
        *snapshots += 1;
        let metrics = evaluate_team(
            team,
            &cfg.env,
            cfg.master_seed,
            &|ep| Stream::SnapshotEval(base + ep),
            &EvalOptions {
                episodes: cfg.snapshot_episodes,
                ..EvalOptions::default()
            },
        )?;
        Ok(CurvePoint {
            env_steps,
            avg_reward: metrics.avg_reward,
            success_rate: metrics.success_rate,
            avg_steps: metrics.avg_steps,
        })
    };

    if cfg.variant.trains() {
        while env_steps + per_update <= cfg.total_steps {
            let buffers = collect_rollout(&mut workers, &team, &cfg.hyper, &mut action_rngs, None)?;
            env_steps += per_update;
            last_diagnostics.clear();
            for i in 0..n {
                let diag = ppo_update(&mut team.agents[i], &buffers[i], &cfg.hyper, &mut shuffle_rngs[i])?;
                if diag.aborted {
                    aborted_updates += 1;
                }
                last_diagnostics.push(diag);
                update_clustering(&mut team.agents[i], &buffers[i], &mut clustering_rngs[i])?;
            }
            if env_steps >= next_snapshot_at {
                curve.push(snapshot(&team, env_steps, &mut snapshots)?);
                while next_snapshot_at <= env_steps {
                    next_snapshot_at += cfg.snapshot_every;
                }
            }
        }
        let took_final = curve.last().map(|p| p.env_steps) == Some(env_steps);
        if env_steps > 0 && !took_final {
            curve.push(snapshot(&team, env_steps, &mut snapshots)?);
        }
    }

    Ok(TrainingArtifacts {
        curve,
        team,
        env_steps,
        last_diagnostics,
        aborted_updates,
        rngs: TrainerRngs {
            action: action_rngs,
            shuffle: shuffle_rngs,
            clustering: clustering_rngs,
            env_workers: workers.into_iter().map(|w| w.rng).collect(),
        },
    })
}
