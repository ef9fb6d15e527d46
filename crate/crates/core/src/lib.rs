//! Decentralized multi-agent reinforcement learning with discrete
//! inter-agent communication.
//!
//! Each agent owns a private policy network. The output of its observation
//! encoder is quantized with streaming (mini-batch) k-means, and the index of
//! the nearest centroid is broadcast as a one-integer message to the other
//! agents. Baseline variants (no communication, full continuous
//! representations, centroid vectors) share the same training loop, which is
//! independent PPO without any parameter sharing.
//!
//! The crate is organized as:
//!
//! - [`nn`] — small dense-network engine with exact reverse-mode gradients,
//!   Adam, and ScaleNorm
//! - [`kmeans`] — per-agent streaming k-means over representation vectors
//! - [`env`] — the four partially observable gridworlds
//! - [`comm`] — message emission and inbox encoding per variant
//! - [`ppo`] — rollout collection, GAE, clipped-surrogate updates, training
//! - [`harness`] — experiment configuration, evaluation, result aggregation
//! - [`checkpoint`] — serialization of agents, centroid tables and RNG state

pub mod agent;
pub mod checkpoint;
pub mod comm;
pub mod env;
pub mod error;
pub mod harness;
pub mod kmeans;
pub mod nn;
pub mod ppo;
pub mod rng;

pub use agent::{Agent, Team, REPR_DIM};
pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use comm::{CommVariant, Message};
pub use env::{Action, EnvConfig, EnvKind, EnvSession, StepResult};
pub use error::{Error, Result};
pub use harness::{
    compare, evaluate_team, run_experiment, ComparisonReport, EvalMetrics, EvalOptions,
    ExperimentConfig, ResultBundle,
};
pub use kmeans::CentroidTable;
pub use nn::{AdamState, AgentNet, DenseLayer};
pub use ppo::{train, CurvePoint, PpoHyper, TrainConfig, TrainingArtifacts};
