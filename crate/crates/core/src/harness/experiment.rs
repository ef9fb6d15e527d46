//! Per-seed training/evaluation orchestration with idempotent artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::curves::emit_curves;
use crate::harness::eval::{evaluate_team, EvalMetrics, EvalOptions};
use crate::ppo::{train, CurvePoint};
use crate::rng::Stream;

/// Completed training + evaluation for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub env_steps: usize,
    pub curve: Vec<CurvePoint>,
    pub metrics: EvalMetrics,
}

/// Mean ± std over completed seeds, in the result-table layout
/// (variant, env, reward, success, steps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub variant: String,
    pub env: String,
    pub seeds: usize,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_success: f64,
    pub std_success: f64,
    pub mean_steps: f64,
    pub std_steps: f64,
}

impl AggregateRow {
    /// One formatted table line: `variant  env  reward  success  steps`.
    pub fn render(&self) -> String {
        format!(
            "{:<24} {:<16} {:>7.2} ± {:<5.2} {:>6.2} ± {:<5.2} {:>7.2} ± {:<5.2}",
            self.variant,
            self.env,
            self.mean_reward,
            self.std_reward,
            self.mean_success,
            self.std_success,
            self.mean_steps,
            self.std_steps
        )
    }
}

/// Everything an experiment produced, aggregated over its seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub name: String,
    pub config_hash: String,
    pub env: EnvConfig,
    pub variant: String,
    pub k: usize,
    pub seeds: Vec<SeedResult>,
    /// Seeds that failed, with their error messages.
    pub failed: Vec<(u64, String)>,
    pub aggregate: AggregateRow,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn aggregate(cfg: &ExperimentConfig, seeds: &[SeedResult]) -> AggregateRow {
    let rewards: Vec<f64> = seeds.iter().map(|s| s.metrics.avg_reward).collect();
    let succ: Vec<f64> = seeds.iter().map(|s| s.metrics.success_rate).collect();
    let steps: Vec<f64> = seeds.iter().map(|s| s.metrics.avg_steps).collect();
    let (mean_reward, std_reward) = mean_std(&rewards);
    let (mean_success, std_success) = mean_std(&succ);
    let (mean_steps, std_steps) = mean_std(&steps);
    AggregateRow {
        variant: cfg.comm.variant.name().to_string(),
        env: cfg.env.kind.name().to_string(),
        seeds: seeds.len(),
        mean_reward,
        std_reward,
        mean_success,
        std_success,
        mean_steps,
        std_steps,
    }
}

/// Directory all artifacts of this experiment live in.
pub fn experiment_dir(cfg: &ExperimentConfig, out_root: &Path) -> PathBuf {
    out_root.join(&cfg.experiment.name)
}

fn seed_result_path(dir: &Path, cfg: &ExperimentConfig, seed: u64) -> PathBuf {
    dir.join(format!("seed{}-{}.json", seed, cfg.short_hash()))
}

/// Per-seed checkpoint location.
pub fn checkpoint_path(dir: &Path, cfg: &ExperimentConfig, seed: u64) -> PathBuf {
    dir.join(format!("seed{}-{}.ckpt.json", seed, cfg.short_hash()))
}

/// Trains and evaluates one seed from scratch (no artifact reuse).
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<(SeedResult, Checkpoint)> {
    let tc = cfg.train_config(seed);
    let artifacts = train(&tc)?;
    let metrics = evaluate_team(
        &artifacts.team,
        &cfg.env,
        seed,
        &Stream::EvalEpisode,
        &EvalOptions {
            episodes: cfg.experiment.eval_episodes,
            ..EvalOptions::default()
        },
    )?;
    let checkpoint = Checkpoint::from_training(&tc, &artifacts);
    Ok((
        SeedResult {
            seed,
            env_steps: artifacts.env_steps,
            curve: artifacts.curve,
            metrics,
        },
        checkpoint,
    ))
}

/// Runs every seed of the experiment, reusing any per-seed artifact whose
/// file name carries the current content hash. Failures are isolated per
/// seed; the bundle aggregates the seeds that completed.
pub fn run_experiment(cfg: &ExperimentConfig, out_root: &Path) -> Result<ResultBundle> {
    cfg.validate()?;
    let dir = experiment_dir(cfg, out_root);
    fs::create_dir_all(&dir)?;
    let mut seeds = Vec::new();
    let mut failed = Vec::new();
    for &seed in &cfg.experiment.seeds {
        let path = seed_result_path(&dir, cfg, seed);
        if path.exists() {
            match fs::read_to_string(&path)
                .map_err(Error::from)
                .and_then(|s| serde_json::from_str::<SeedResult>(&s).map_err(Error::from))
            {
                Ok(result) => {
                    seeds.push(result);
                    continue;
                }
                Err(e) => {
                    return Err(Error::Checkpoint(format!(
                        "artifact {} exists but cannot be read ({e}); move it away to recompute",
                        path.display()
                    )));
                }
            }
        }
        match run_seed(cfg, seed) {
            Ok((result, checkpoint)) => {
                fs::write(&path, serde_json::to_string(&result)?)?;
                checkpoint.save(&checkpoint_path(&dir, cfg, seed))?;
                seeds.push(result);
            }
            Err(e) => failed.push((seed, e.to_string())),
        }
    }
    if seeds.is_empty() {
        return Err(Error::Config(format!(
            "all {} seeds failed; first error: {}",
            failed.len(),
            failed.first().map(|(_, e)| e.as_str()).unwrap_or("none")
        )));
    }
    let bundle = ResultBundle {
        name: cfg.experiment.name.clone(),
        config_hash: cfg.content_hash(),
        env: cfg.env.clone(),
        variant: cfg.comm.variant.name().to_string(),
        k: cfg.k(),
        aggregate: aggregate(cfg, &seeds),
        seeds,
        failed,
    };
    fs::write(
        dir.join(format!("bundle-{}.json", cfg.short_hash())),
        serde_json::to_string(&bundle)?,
    )?;
    let curves = emit_curves(&bundle);
    fs::write(dir.join("curves.csv"), curves.per_seed_csv)?;
    fs::write(dir.join("curves_mean.csv"), curves.mean_csv)?;
    fs::write(dir.join("curves.dat"), curves.gnuplot_dat)?;
    fs::write(dir.join("table_row.txt"), format!("{}\n", bundle.aggregate.render()))?;
    Ok(bundle)
}
