//! Deterministic RNG streams derived from a single master seed.
//!
//! Every source of randomness in a run (weight init, action sampling, env
//! resets, k-means seeding, minibatch shuffling, evaluation episodes) gets its
//! own ChaCha stream so that adding draws to one consumer never perturbs
//! another. (seed, stream id) fully determines the sequence.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream-id namespaces. Agent- or episode-scoped streams add their index to
/// the base, so bases are spaced far apart.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    /// Network weight initialization for one agent.
    AgentInit(usize),
    /// Action sampling (and random-baseline actions) for one agent.
    ActionSampling(usize),
    /// Minibatch shuffling for one agent's PPO updates.
    Shuffle(usize),
    /// Centroid seeding for one agent's k-means table.
    Clustering(usize),
    /// Environment resets for one parallel rollout worker.
    EnvWorker(usize),
    /// One evaluation episode.
    EvalEpisode(u64),
    /// Training-time curve snapshots (kept apart from final evaluation).
    SnapshotEval(u64),
    /// Bootstrap resampling in comparison reports.
    Bootstrap,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::AgentInit(i) => 0x0100_0000 + i as u64,
            Stream::ActionSampling(i) => 0x0200_0000 + i as u64,
            Stream::Shuffle(i) => 0x0300_0000 + i as u64,
            Stream::Clustering(i) => 0x0400_0000 + i as u64,
            Stream::EnvWorker(i) => 0x0500_0000 + i as u64,
            Stream::EvalEpisode(e) => 0x0600_0000 + e,
            Stream::SnapshotEval(e) => 0x4000_0000 + e,
            Stream::Bootstrap => 0x0700_0000,
        }
    }
}

/// Builds the RNG for a given (master seed, stream).
pub fn stream_rng(master_seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream.id());
    rng
}
