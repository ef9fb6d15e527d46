//! Learning-curve CSV and gnuplot data emission.

use std::collections::BTreeMap;

use crate::harness::experiment::ResultBundle;

/// Rendered curve files for one bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFiles {
    /// Long format: `seed,env_steps,avg_reward,success_rate,avg_steps`.
    pub per_seed_csv: String,
    /// Aggregated per snapshot: mean and std of each metric.
    pub mean_csv: String,
    /// Same aggregate as whitespace-separated columns with a `#` header.
    pub gnuplot_dat: String,
}

/// Mean/std of the seeds' metrics at each snapshot position. Snapshots are
/// grouped by their env-step value; with a shared config all seeds snapshot
/// at identical step counts.
pub fn emit_curves(bundle: &ResultBundle) -> CurveFiles {
    let mut per_seed_csv = String::from("seed,env_steps,avg_reward,success_rate,avg_steps\n");
    for seed in &bundle.seeds {
        for p in &seed.curve {
            per_seed_csv.push_str(&format!(
                "{},{},{},{},{}\n",
                seed.seed, p.env_steps, p.avg_reward, p.success_rate, p.avg_steps
            ));
        }
    }

    // env_steps → per-seed metric triples, in ascending step order.
    let mut by_step: BTreeMap<usize, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for seed in &bundle.seeds {
        for p in &seed.curve {
            by_step
                .entry(p.env_steps)
                .or_default()
                .push((p.avg_reward, p.success_rate, p.avg_steps));
        }
    }
    let header = "env_steps,mean_reward,std_reward,mean_success,std_success,mean_steps,std_steps";
    let mut mean_csv = format!("{header}\n");
    let mut gnuplot_dat = format!("# {}\n", header.replace(',', " "));
    for (steps, rows) in &by_step {
        let n = rows.len() as f64;
        let stats = |pick: fn(&(f64, f64, f64)) -> f64| {
            let mean = rows.iter().map(pick).sum::<f64>() / n;
            let var = rows.iter().map(|r| (pick(r) - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        let (mr, sr) = stats(|r| r.0);
        let (ms, ss) = stats(|r| r.1);
        let (mt, st) = stats(|r| r.2);
        mean_csv.push_str(&format!("{steps},{mr},{sr},{ms},{ss},{mt},{st}\n"));
        gnuplot_dat.push_str(&format!("{steps} {mr} {sr} {ms} {ss} {mt} {st}\n"));
    }
    CurveFiles {
        per_seed_csv,
        mean_csv,
        gnuplot_dat,
    }
}
