//! Ranked comparison of result bundles with bootstrap confidence
//! intervals over seeds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::experiment::{AggregateRow, ResultBundle};
use crate::rng::{stream_rng, Stream};
use rand::Rng;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Difference between two bundles' per-seed success rates and rewards
/// (first minus second), with percentile-bootstrap confidence intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDiff {
    pub a: String,
    pub b: String,
    pub success_diff: f64,
    pub success_ci: (f64, f64),
    pub reward_diff: f64,
    pub reward_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub env: String,
    /// Aggregate rows sorted by mean success (desc), then mean reward.
    pub ranked: Vec<AggregateRow>,
    /// All unordered bundle pairs, in ranked order.
    pub pairwise: Vec<PairwiseDiff>,
    pub warnings: Vec<String>,
}

impl ComparisonReport {
    /// Human-readable report: ranked table then pairwise differences.
    pub fn render(&self) -> String {
        let mut out = format!(
            "environment: {}\n\n{:<24} {:<16} {:>15} {:>14} {:>15}\n",
            self.env, "variant", "env", "reward", "success", "steps"
        );
        for row in &self.ranked {
            out.push_str(&row.render());
            out.push('\n');
        }
        out.push('\n');
        for d in &self.pairwise {
            out.push_str(&format!(
                "{} − {}: Δsuccess = {:+.3} [{:+.3}, {:+.3}], Δreward = {:+.3} [{:+.3}, {:+.3}]\n",
                d.a,
                d.b,
                d.success_diff,
                d.success_ci.0,
                d.success_ci.1,
                d.reward_diff,
                d.reward_ci.0,
                d.reward_ci.1
            ));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Percentile bootstrap over per-seed values: resamples each side with
/// replacement and takes the 2.5%/97.5% quantiles of the mean difference.
fn bootstrap_ci(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> (f64, f64) {
    let mut diffs = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let ra = mean(&(0..a.len()).map(|_| a[rng.random_range(0..a.len())]).collect::<Vec<_>>());
        let rb = mean(&(0..b.len()).map(|_| b[rng.random_range(0..b.len())]).collect::<Vec<_>>());
        diffs.push(ra - rb);
    }
    diffs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let pick = |q: f64| diffs[((diffs.len() - 1) as f64 * q).round() as usize];
    (pick(0.025), pick(0.975))
}

/// Compares bundles that share an environment. `master_seed` drives the
/// bootstrap resampling, making reports reproducible.
pub fn compare(bundles: &[ResultBundle], master_seed: u64) -> Result<ComparisonReport> {
    if bundles.len() < 2 {
        return Err(Error::Config("compare needs at least two bundles".into()));
    }
    let first = &bundles[0].env;
    let same_env = |e: &crate::env::EnvConfig| {
        e.kind == first.kind
            && e.n_agents() == first.n_agents()
            && e.max_steps() == first.max_steps()
            && e.interior() == first.interior()
    };
    if let Some(bad) = bundles.iter().find(|b| !same_env(&b.env)) {
        return Err(Error::Config(format!(
            "bundles compare different environments: {} vs {}",
            first.kind, bad.env.kind
        )));
    }

    let mut warnings = Vec::new();
    let mut ranked: Vec<(usize, AggregateRow)> = bundles
        .iter()
        .enumerate()
        .map(|(i, b)| (i, b.aggregate.clone()))
        .collect();
    ranked.sort_by(|(_, x), (_, y)| {
        (y.mean_success, y.mean_reward)
            .partial_cmp(&(x.mean_success, x.mean_reward))
            .unwrap()
    });

    let mut rng = stream_rng(master_seed, Stream::Bootstrap);
    let mut pairwise = Vec::new();
    for i in 0..ranked.len() {
        for j in (i + 1)..ranked.len() {
            let ba = &bundles[ranked[i].0];
            let bb = &bundles[ranked[j].0];
            if ba.seeds.len() < 2 || bb.seeds.len() < 2 {
                warnings.push(format!(
                    "{} vs {}: a bundle has a single seed; bootstrap interval is degenerate",
                    ba.variant, bb.variant
                ));
            }
            let succ_a: Vec<f64> = ba.seeds.iter().map(|s| s.metrics.success_rate).collect();
            let succ_b: Vec<f64> = bb.seeds.iter().map(|s| s.metrics.success_rate).collect();
            let rew_a: Vec<f64> = ba.seeds.iter().map(|s| s.metrics.avg_reward).collect();
            let rew_b: Vec<f64> = bb.seeds.iter().map(|s| s.metrics.avg_reward).collect();
            pairwise.push(PairwiseDiff {
                a: ba.variant.clone(),
                b: bb.variant.clone(),
                success_diff: mean(&succ_a) - mean(&succ_b),
                success_ci: bootstrap_ci(&succ_a, &succ_b, BOOTSTRAP_RESAMPLES, &mut rng),
                reward_diff: mean(&rew_a) - mean(&rew_b),
                reward_ci: bootstrap_ci(&rew_a, &rew_b, BOOTSTRAP_RESAMPLES, &mut rng),
            });
        }
    }
    Ok(ComparisonReport {
        env: first.kind.name().to_string(),
        ranked: ranked.into_iter().map(|(_, r)| r).collect(),
        pairwise,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvConfig, EnvKind};
    use crate::harness::eval::EvalMetrics;
    use crate::harness::experiment::SeedResult;

    fn bundle(variant: &str, env: EnvKind, succ: &[f64]) -> ResultBundle {
        let seeds: Vec<SeedResult> = succ
            .iter()
            .enumerate()
            .map(|(i, &s)| SeedResult {
                seed: i as u64 + 1,
                env_steps: 0,
                curve: Vec::new(),
                metrics: EvalMetrics {
                    avg_reward: s - 1.0,
                    success_rate: s,
                    avg_steps: 3.0,
                    episodes: 100,
                    records: Vec::new(),
                    traces: Vec::new(),
                },
            })
            .collect();
        let n = seeds.len() as f64;
        let mean_success = succ.iter().sum::<f64>() / n;
        ResultBundle {
            name: variant.to_string(),
            config_hash: "h".into(),
            env: EnvConfig::new(env),
            variant: variant.to_string(),
            k: 8,
            seeds,
            failed: Vec::new(),
            aggregate: AggregateRow {
                variant: variant.to_string(),
                env: env.name().to_string(),
                seeds: succ.len(),
                mean_reward: mean_success - 1.0,
                std_reward: 0.0,
                mean_success,
                std_success: 0.0,
                mean_steps: 3.0,
                std_steps: 0.0,
            },
        }
    }

    #[test]
    fn identical_bundles_show_zero_difference() {
        let a = bundle("cluster-comm", EnvKind::ClosedRooms, &[0.9, 0.95, 0.92]);
        let b = bundle("cluster-comm", EnvKind::ClosedRooms, &[0.9, 0.95, 0.92]);
        let report = compare(&[a, b], 1).unwrap();
        let d = &report.pairwise[0];
        assert_eq!(d.success_diff, 0.0);
        assert!(d.success_ci.0 <= 0.0 && d.success_ci.1 >= 0.0);
    }

    #[test]
    fn clear_separation_yields_ci_excluding_zero() {
        let hi = bundle("cluster-comm", EnvKind::ClosedRooms, &[0.97, 0.99, 0.98]);
        let lo = bundle("no-comm", EnvKind::ClosedRooms, &[0.47, 0.52, 0.50]);
        let report = compare(&[lo.clone(), hi.clone()], 2).unwrap();
        assert_eq!(report.ranked[0].variant, "cluster-comm");
        let d = &report.pairwise[0];
        assert_eq!(d.a, "cluster-comm");
        assert!((d.success_diff - 0.483_333).abs() < 1e-3);
        assert!(d.success_ci.0 > 0.0, "{d:?}");
        let text = report.render();
        assert!(text.contains("Δsuccess"));
    }

    #[test]
    fn single_seed_bundles_warn_about_degenerate_intervals() {
        let a = bundle("cluster-comm", EnvKind::ClosedRooms, &[0.9]);
        let b = bundle("no-comm", EnvKind::ClosedRooms, &[0.5]);
        let report = compare(&[a, b], 3).unwrap();
        assert!(!report.warnings.is_empty());
        let d = &report.pairwise[0];
        assert_eq!(d.success_ci.0, d.success_ci.1);
    }

    #[test]
    fn mismatched_environments_are_rejected() {
        let a = bundle("cluster-comm", EnvKind::ClosedRooms, &[0.9, 0.8]);
        let b = bundle("cluster-comm", EnvKind::Bottleneck, &[0.9, 0.8]);
        assert!(compare(&[a, b], 4).is_err());
    }

    #[test]
    fn fewer_than_two_bundles_is_an_error() {
        let a = bundle("cluster-comm", EnvKind::ClosedRooms, &[0.9]);
        assert!(compare(&[a], 5).is_err());
    }

    #[test]
    fn comparison_is_reproducible() {
        let a = bundle("cluster-comm", EnvKind::ClosedRooms, &[0.9, 0.7, 0.8]);
        let b = bundle("no-comm", EnvKind::ClosedRooms, &[0.4, 0.6, 0.5]);
        let r1 = compare(&[a.clone(), b.clone()], 6).unwrap();
        let r2 = compare(&[a, b], 6).unwrap();
        assert_eq!(r1, r2);
    }
}
