//! Synchronous rollout collection across parallel environments.
//!
//! The message barrier: at every step each agent forwards on
//! `(obs_t, inbox_t)` where the inbox encodes the messages all other agents
//! emitted at step t−1. The messages emitted at step t are held back until
//! t+1. On an episode reset the held messages are dropped, so the first
//! step of every episode sees a zero inbox.

use rand_chacha::ChaCha8Rng;

use crate::agent::Team;
use crate::comm::{emit_message, encode_inbox, Message};
use crate::env::{Action, EnvConfig, EnvSession, NUM_ACTIONS};
use crate::error::Result;
use crate::ppo::buffer::{RolloutBuffer, Transition};
use crate::ppo::policy::sample_action;
use crate::ppo::PpoHyper;
use crate::rng::{stream_rng, Stream};
use rand::Rng;

/// One parallel environment plus its communication state.
#[derive(Debug, Clone)]
pub struct EnvWorker {
    pub session: EnvSession,
    /// Current per-agent stacked observations.
    pub obs: Vec<Vec<f64>>,
    /// Messages emitted at the previous step; `None` right after a reset.
    pub held_messages: Vec<Message>,
    pub rng: ChaCha8Rng,
}

impl EnvWorker {
    pub fn new(env: &EnvConfig, master_seed: u64, worker: usize) -> Result<Self> {
        let mut session = EnvSession::new(env)?;
        let mut rng = stream_rng(master_seed, Stream::EnvWorker(worker));
        let obs = session.reset(&mut rng);
        let n = session.n_agents();
        Ok(Self {
            session,
            obs,
            held_messages: vec![Message::None; n],
            rng,
        })
    }
}

/// One agent-step of the communication protocol, recorded when a trace
/// sink is supplied: which messages were consumed and which were emitted.
#[derive(Debug, Clone)]
pub struct CommEvent {
    /// Worker index.
    pub env: usize,
    /// Rollout step (global across episodes).
    pub t: usize,
    /// Step within the current episode, 0 at the first post-reset step.
    pub episode_t: usize,
    pub agent: usize,
    /// Consumed inbox, ascending sender index with the agent's slot absent.
    pub inbox: Vec<Message>,
    pub emitted: Message,
}

/// Collects `horizon` steps from every worker into per-agent buffers and
/// scores them with GAE. `action_rngs` is one sampling stream per agent.
/// When `trace` is given, every agent-step appends a [`CommEvent`].
pub fn collect_rollout(
    workers: &mut [EnvWorker],
    team: &Team,
    hyper: &PpoHyper,
    action_rngs: &mut [ChaCha8Rng],
    mut trace: Option<&mut Vec<CommEvent>>,
) -> Result<Vec<RolloutBuffer>> {
    let n = team.n_agents();
    let d = team.agents[0].net.spec.hidden;
    let mut buffers: Vec<RolloutBuffer> = (0..n)
        .map(|_| RolloutBuffer::new(hyper.horizon, workers.len()))
        .collect();

    for t in 0..hyper.horizon {
        for (e, w) in workers.iter_mut().enumerate() {
            let episode_t = w.session.step_count();
            let mut actions = Vec::with_capacity(n);
            let mut emitted = Vec::with_capacity(n);
            let mut pending = Vec::with_capacity(n);
            for i in 0..n {
                let inbox: Vec<Message> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| w.held_messages[j].clone())
                    .collect();
                let enc = encode_inbox(team.variant, &inbox, team.k, d)?;
                let fwd = team.agents[i].net.forward(&w.obs[i], &enc)?;
                let (action, log_prob) = if team.variant.trains() {
                    sample_action(&fwd.logits, &mut action_rngs[i])?
                } else {
                    let a = action_rngs[i].random_range(0..NUM_ACTIONS);
                    (a, -(NUM_ACTIONS as f64).ln())
                };
                let msg = emit_message(
                    team.variant,
                    &fwd.representation,
                    team.agents[i].table.as_ref(),
                    false,
                )?;
                if let Some(sink) = trace.as_mut() {
                    sink.push(CommEvent {
                        env: e,
                        t,
                        episode_t,
                        agent: i,
                        inbox: inbox.clone(),
                        emitted: msg.clone(),
                    });
                }
                emitted.push(msg);
                actions.push(Action::from_index(action));
                pending.push((enc, fwd, action, log_prob));
            }
            let step = w.session.step(&actions)?;
            for (i, (enc, fwd, action, log_prob)) in pending.into_iter().enumerate() {
                buffers[i].push(Transition {
                    obs: w.obs[i].clone(),
                    inbox: enc,
                    action,
                    log_prob,
                    value: fwd.value,
                    reward: step.rewards[i],
                    done: step.done,
                    representation: fwd.representation,
                })?;
            }
            if step.done {
                w.obs = w.session.reset(&mut w.rng);
                w.held_messages = vec![Message::None; n];
            } else {
                w.obs = step.observations;
                w.held_messages = emitted;
            }
        }
    }

    // Bootstrap values for the states the rollout stopped in.
    for i in 0..n {
        let mut bootstraps = Vec::with_capacity(workers.len());
        for w in workers.iter() {
            let inbox: Vec<Message> = (0..n)
                .filter(|&j| j != i)
                .map(|j| w.held_messages[j].clone())
                .collect();
            let enc = encode_inbox(team.variant, &inbox, team.k, d)?;
            let fwd = team.agents[i].net.forward(&w.obs[i], &enc)?;
            bootstraps.push(fwd.value);
        }
        buffers[i].compute_advantages(&bootstraps, hyper.gamma, hyper.lambda)?;
    }
    Ok(buffers)
}
