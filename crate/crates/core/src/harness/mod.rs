//! Experiment surface: configuration files, evaluation, result bundles,
//! comparisons, and learning-curve emission.

pub mod compare;
pub mod config;
pub mod curves;
pub mod eval;
pub mod experiment;

pub use compare::{compare, ComparisonReport, PairwiseDiff};
pub use config::ExperimentConfig;
pub use curves::{emit_curves, CurveFiles};
pub use eval::{
    evaluate_team, message_csv, EpisodeRecord, EpisodeTrace, EvalMetrics, EvalOptions,
};
pub use experiment::{run_experiment, ResultBundle, SeedResult};
