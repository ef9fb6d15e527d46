//! Command-line interface: train teams from a config file, evaluate and
//! replay checkpoints, run random baselines, and compare result bundles.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use clustercomm::harness::{
    compare, emit_curves, evaluate_team, message_csv, run_experiment, EvalMetrics, EvalOptions,
    ExperimentConfig, ResultBundle,
};
use clustercomm::ppo::PpoHyper;
use clustercomm::rng::Stream;
use clustercomm::{Checkpoint, CommVariant, EnvConfig, EnvKind, Team};

#[derive(Parser)]
#[command(
    name = "clustercomm",
    version,
    about = "Decentralized multi-agent RL with discrete clustered communication"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of an experiment config and write result artifacts.
    Train {
        /// Experiment config file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Train only this seed instead of the config's seed list.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's environment.
        #[arg(long)]
        env: Option<String>,
        /// Override the config's communication variant.
        #[arg(long)]
        variant: Option<String>,
        /// Output root directory (default: config's out_dir, else `results`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a trained checkpoint over fresh episodes.
    Evaluate {
        /// Checkpoint file written by `train`.
        checkpoint: PathBuf,
        /// Abort if the checkpoint was not trained on this environment.
        #[arg(long)]
        env: Option<String>,
        /// Abort if the checkpoint does not hold this variant.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        /// Master seed for the evaluation episode streams
        /// (default: the checkpoint's training seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Write full metrics as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-episode records as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate the random-action baseline on an environment.
    Baseline {
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write full metrics as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-episode records as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Rank result bundles of one environment with bootstrap intervals.
    Compare {
        /// Two or more `bundle-*.json` files written by `train`.
        bundles: Vec<PathBuf>,
        /// Seed for the bootstrap resampling.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the comparison report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-emit learning-curve CSV and gnuplot files from a bundle.
    Curves {
        /// A `bundle-*.json` file written by `train`.
        bundle: PathBuf,
        /// Directory for the emitted files (default: next to the bundle).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay checkpoint episodes as ASCII frames.
    Render {
        /// Checkpoint file written by `train`.
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the replayed message traffic as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_env(name: &str) -> Result<EnvKind> {
    EnvKind::parse(name).with_context(|| format!("unknown environment `{name}`"))
}

fn parse_variant(name: &str) -> Result<CommVariant> {
    CommVariant::parse(name).with_context(|| format!("unknown variant `{name}`"))
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::load(path).with_context(|| format!("cannot load checkpoint {}", path.display()))
}

fn load_bundle(path: &Path) -> Result<ResultBundle> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse bundle {}", path.display()))
}

fn records_csv(metrics: &EvalMetrics) -> String {
    let mut out = String::from("episode,reward,steps,success\n");
    for r in &metrics.records {
        out.push_str(&format!("{},{},{},{}\n", r.episode, r.reward, r.steps, r.success));
    }
    out
}

fn print_metrics(label: &str, m: &EvalMetrics) {
    println!(
        "{label}: reward {:.2}, success {:.2}, steps {:.2} ({} episodes)",
        m.avg_reward, m.success_rate, m.avg_steps, m.episodes
    );
}

fn write_metric_files(
    metrics: &EvalMetrics,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<()> {
    if let Some(path) = out {
        fs::write(path, serde_json::to_string_pretty(metrics)?)?;
        println!("metrics json: {}", path.display());
    }
    if let Some(path) = csv {
        fs::write(path, records_csv(metrics))?;
        println!("records csv: {}", path.display());
    }
    Ok(())
}

fn cmd_train(
    config: &Path,
    seed: Option<u64>,
    env: Option<String>,
    variant: Option<String>,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(config)
        .with_context(|| format!("cannot load config {}", config.display()))?;
    if let Some(seed) = seed {
        cfg.experiment.seeds = vec![seed];
    }
    if let Some(name) = env {
        cfg.env = EnvConfig::new(parse_env(&name)?);
    }
    if let Some(name) = variant {
        cfg.comm.variant = parse_variant(&name)?;
    }
    let out_root = out
        .or_else(|| cfg.experiment.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let bundle = run_experiment(&cfg, &out_root)?;
    println!("{}", bundle.aggregate.render());
    for (seed, err) in &bundle.failed {
        eprintln!("seed {seed} failed: {err}");
    }
    println!(
        "artifacts: {}",
        out_root.join(&cfg.experiment.name).display()
    );
    Ok(())
}

fn cmd_evaluate(
    checkpoint: &Path,
    env: Option<String>,
    variant: Option<String>,
    episodes: usize,
    seed: Option<u64>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
) -> Result<()> {
    let ckpt = load_checkpoint(checkpoint)?;
    let want_env = env.map(|e| parse_env(&e)).transpose()?;
    let want_variant = variant.map(|v| parse_variant(&v)).transpose()?;
    ckpt.ensure_matches(want_env, want_variant)?;
    let opts = EvalOptions {
        episodes,
        index_mode: ckpt.config.variant == CommVariant::CentroidComm,
        capture_traces: false,
        parallel: true,
    };
    let master_seed = seed.unwrap_or(ckpt.config.master_seed);
    let metrics = evaluate_team(
        &ckpt.team,
        &ckpt.config.env,
        master_seed,
        &Stream::EvalEpisode,
        &opts,
    )?;
    print_metrics(ckpt.config.variant.name(), &metrics);
    write_metric_files(&metrics, out.as_deref(), csv.as_deref())
}

fn cmd_baseline(
    env: &str,
    episodes: usize,
    seed: u64,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
) -> Result<()> {
    let env = EnvConfig::new(parse_env(env)?);
    let team = Team::new(
        &env,
        CommVariant::Random,
        env.kind.default_k(),
        PpoHyper::default().lr,
        seed,
    )?;
    let metrics = evaluate_team(
        &team,
        &env,
        seed,
        &Stream::EvalEpisode,
        &EvalOptions {
            episodes,
            ..EvalOptions::default()
        },
    )?;
    print_metrics(&format!("random @ {}", env.kind.name()), &metrics);
    write_metric_files(&metrics, out.as_deref(), csv.as_deref())
}

fn cmd_compare(bundles: &[PathBuf], seed: u64, out: Option<PathBuf>) -> Result<()> {
    let loaded: Vec<ResultBundle> = bundles
        .iter()
        .map(|p| load_bundle(p))
        .collect::<Result<_>>()?;
    let report = compare(&loaded, seed)?;
    print!("{}", report.render());
    if let Some(path) = out {
        fs::write(&path, serde_json::to_string_pretty(&report)?)?;
        println!("report json: {}", path.display());
    }
    Ok(())
}

fn cmd_curves(bundle: &Path, out: Option<PathBuf>) -> Result<()> {
    let loaded = load_bundle(bundle)?;
    let dir = out.unwrap_or_else(|| {
        bundle
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."))
    });
    fs::create_dir_all(&dir)?;
    let files = emit_curves(&loaded);
    fs::write(dir.join("curves.csv"), files.per_seed_csv)?;
    fs::write(dir.join("curves_mean.csv"), files.mean_csv)?;
    fs::write(dir.join("curves.dat"), files.gnuplot_dat)?;
    println!("curves: {}", dir.display());
    Ok(())
}

fn cmd_render(
    checkpoint: &Path,
    episodes: usize,
    seed: Option<u64>,
    csv: Option<PathBuf>,
) -> Result<()> {
    let ckpt = load_checkpoint(checkpoint)?;
    let opts = EvalOptions {
        episodes,
        index_mode: ckpt.config.variant == CommVariant::CentroidComm,
        capture_traces: true,
        parallel: false,
    };
    let master_seed = seed.unwrap_or(ckpt.config.master_seed);
    let metrics = evaluate_team(
        &ckpt.team,
        &ckpt.config.env,
        master_seed,
        &Stream::EvalEpisode,
        &opts,
    )?;
    for trace in &metrics.traces {
        println!(
            "episode {} — {}",
            trace.episode,
            if trace.success { "success" } else { "failure" }
        );
        println!("t=0\n{}", trace.initial_render);
        for (t, step) in trace.steps.iter().enumerate() {
            let messages: Vec<String> = step
                .messages
                .iter()
                .map(|m| format!("{m:?}"))
                .collect();
            println!(
                "t={} actions {:?} rewards {:?} messages [{}]\n{}",
                t + 1,
                step.actions,
                step.rewards,
                messages.join(", "),
                step.render
            );
        }
    }
    print_metrics(ckpt.config.variant.name(), &metrics);
    if let Some(path) = csv {
        fs::write(&path, message_csv(&metrics.traces))?;
        println!("messages csv: {}", path.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train {
            config,
            seed,
            env,
            variant,
            out,
        } => cmd_train(&config, seed, env, variant, out),
        Command::Evaluate {
            checkpoint,
            env,
            variant,
            episodes,
            seed,
            out,
            csv,
        } => cmd_evaluate(&checkpoint, env, variant, episodes, seed, out, csv),
        Command::Baseline {
            env,
            episodes,
            seed,
            out,
            csv,
        } => cmd_baseline(&env, episodes, seed, out, csv),
        Command::Compare { bundles, seed, out } => cmd_compare(&bundles, seed, out),
        Command::Curves { bundle, out } => cmd_curves(&bundle, out),
        Command::Render {
            checkpoint,
            episodes,
            seed,
            csv,
        } => cmd_render(&checkpoint, episodes, seed, csv),
    }
}
