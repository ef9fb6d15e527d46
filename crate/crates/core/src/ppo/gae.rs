//! Generalized Advantage Estimation over one chronological trajectory.

use crate::error::{Error, Result};

/// Computes GAE advantages and returns for a single environment stream.
///
/// `dones[t]` marks that the episode ended *at* step t; no credit flows
/// across that boundary. `bootstrap_value` is the critic's estimate for the
/// state following the last step and only matters when the stream was
/// truncated mid-episode.
///
/// Recursion, walking backwards with `A_{pos(t)+1} = 0` past the end:
///
/// ```text
/// δ_t = r_t + γ·(1 − done_t)·V(s_{t+1}) − V(s_t)
/// A_t = δ_t + γλ·(1 − done_t)·A_{t+1}
/// ```
///
/// Returns are `A_t + V(s_t)`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(Error::Contract(format!(
            "series lengths differ: {} rewards, {} values, {} dones",
            n,
            values.len(),
            dones.len()
        )));
    }
    let mut advantages = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let mask = if dones[t] { 0.0 } else { 1.0 };
        let next_value = if t + 1 < n { values[t + 1] } else { bootstrap_value };
        let delta = rewards[t] + gamma * mask * next_value - values[t];
        running = delta + gamma * lambda * mask * running;
        advantages[t] = running;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((advantages, returns))
}
