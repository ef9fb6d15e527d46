//! Per-agent rollout storage.

use crate::error::{Error, Result};
use crate::ppo::gae::compute_gae;

/// One agent's transition from a rollout step.
#[derive(Debug, Clone)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub inbox: Vec<f64>,
    pub action: usize,
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
    /// Observation-encoder output, kept for the clustering update.
    pub representation: Vec<f64>,
}

/// Fixed-capacity storage for one agent's `horizon × n_envs` transitions.
///
/// Parallel environments are interleaved: the transition for environment e
/// at rollout step t lives at index `t · n_envs + e`. Advantages and
/// returns are filled in by [`RolloutBuffer::compute_advantages`], which
/// de-interleaves each environment's chronological stream.
#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    pub obs: Vec<Vec<f64>>,
    pub inboxes: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub representations: Vec<Vec<f64>>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
    capacity: usize,
    n_envs: usize,
}

impl RolloutBuffer {
    pub fn new(horizon: usize, n_envs: usize) -> Self {
        let capacity = horizon * n_envs;
        Self {
            obs: Vec::with_capacity(capacity),
            inboxes: Vec::with_capacity(capacity),
            actions: Vec::with_capacity(capacity),
            log_probs: Vec::with_capacity(capacity),
            values: Vec::with_capacity(capacity),
            rewards: Vec::with_capacity(capacity),
            dones: Vec::with_capacity(capacity),
            representations: Vec::with_capacity(capacity),
            advantages: Vec::new(),
            returns: Vec::new(),
            capacity,
            n_envs,
        }
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if self.len() >= self.capacity {
            return Err(Error::Contract(format!(
                "rollout buffer already holds its capacity of {} transitions",
                self.capacity
            )));
        }
        self.obs.push(t.obs);
        self.inboxes.push(t.inbox);
        self.actions.push(t.action);
        self.log_probs.push(t.log_prob);
        self.values.push(t.value);
        self.rewards.push(t.reward);
        self.dones.push(t.done);
        self.representations.push(t.representation);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn n_envs(&self) -> usize {
        self.n_envs
    }

    /// True once advantages/returns have been computed for the full buffer.
    pub fn is_scored(&self) -> bool {
        self.advantages.len() == self.len() && !self.is_empty()
    }

    pub fn clear(&mut self) {
        self.obs.clear();
        self.inboxes.clear();
        self.actions.clear();
        self.log_probs.clear();
        self.values.clear();
        self.rewards.clear();
        self.dones.clear();
        self.representations.clear();
        self.advantages.clear();
        self.returns.clear();
    }

    /// Runs GAE per environment stream and scatters advantages/returns
    /// back into buffer order. `bootstraps[e]` is the critic value for
    /// environment e's state after the last collected step.
    pub fn compute_advantages(
        &mut self,
        bootstraps: &[f64],
        gamma: f64,
        lambda: f64,
    ) -> Result<()> {
        if !self.is_full() {
            return Err(Error::Contract(format!(
                "advantage computation needs a full buffer ({} of {})",
                self.len(),
                self.capacity
            )));
        }
        if bootstraps.len() != self.n_envs {
            return Err(Error::Contract(format!(
                "{} bootstrap values for {} environments",
                bootstraps.len(),
                self.n_envs
            )));
        }
        self.advantages = vec![0.0; self.len()];
        self.returns = vec![0.0; self.len()];
        let horizon = self.len() / self.n_envs;
        for e in 0..self.n_envs {
            let idx: Vec<usize> = (0..horizon).map(|t| t * self.n_envs + e).collect();
            let rewards: Vec<f64> = idx.iter().map(|&i| self.rewards[i]).collect();
            let values: Vec<f64> = idx.iter().map(|&i| self.values[i]).collect();
            let dones: Vec<bool> = idx.iter().map(|&i| self.dones[i]).collect();
            let (adv, ret) =
                compute_gae(&rewards, &values, &dones, bootstraps[e], gamma, lambda)?;
            for (j, &i) in idx.iter().enumerate() {
                self.advantages[i] = adv[j];
                self.returns[i] = ret[j];
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transition(reward: f64, value: f64, done: bool) -> Transition {
        Transition {
            obs: vec![0.0],
            inbox: Vec::new(),
            action: 0,
            log_prob: 0.0,
            value,
            reward,
            done,
            representation: vec![0.0],
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let mut b = RolloutBuffer::new(2, 1);
        b.push(transition(0.0, 0.0, false)).unwrap();
        b.push(transition(0.0, 0.0, false)).unwrap();
        assert!(b.is_full());
        assert!(b.push(transition(0.0, 0.0, false)).is_err());
        b.clear();
        assert!(b.is_empty());
        assert!(!b.is_scored());
    }

    #[test]
    fn interleaved_streams_are_scored_independently() {
        // Two envs, horizon 3, γ = λ = 1, values 0. Env 0 rewards 1, 2, 3
        // (done at end); env 1 rewards 10, 20, 30 with done at step 0.
        let mut b = RolloutBuffer::new(3, 2);
        let plan = [
            (1.0, false),
            (10.0, true),
            (2.0, false),
            (20.0, false),
            (3.0, true),
            (30.0, true),
        ];
        for (r, d) in plan {
            b.push(transition(r, 0.0, d)).unwrap();
        }
        b.compute_advantages(&[0.0, 0.0], 1.0, 1.0).unwrap();
        // Env 0 (indices 0, 2, 4): suffix sums 6, 5, 3.
        assert_eq!(b.advantages[0], 6.0);
        assert_eq!(b.advantages[2], 5.0);
        assert_eq!(b.advantages[4], 3.0);
        // Env 1 (indices 1, 3, 5): 10 alone, then 50, 30.
        assert_eq!(b.advantages[1], 10.0);
        assert_eq!(b.advantages[3], 50.0);
        assert_eq!(b.advantages[5], 30.0);
        assert!(b.is_scored());
    }

    #[test]
    fn truncated_stream_uses_its_own_bootstrap() {
        let mut b = RolloutBuffer::new(1, 2);
        b.push(transition(0.0, 0.0, false)).unwrap();
        b.push(transition(0.0, 0.0, false)).unwrap();
        b.compute_advantages(&[1.0, 3.0], 0.5, 1.0).unwrap();
        assert_eq!(b.advantages, vec![0.5, 1.5]);
    }

    #[test]
    fn partial_buffer_cannot_be_scored() {
        let mut b = RolloutBuffer::new(2, 2);
        b.push(transition(0.0, 0.0, false)).unwrap();
        assert!(b.compute_advantages(&[0.0, 0.0], 0.9, 0.9).is_err());
    }
}
