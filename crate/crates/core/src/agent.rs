//! Agent and team construction.
//!
//! An [`Agent`] owns everything that is private to it: its policy/value
//! network, its Adam state, and — for clustering variants — its centroid
//! table. A [`Team`] is the N agents of one experiment plus the
//! communication setup they were built for. Nothing here is ever shared
//! between agents; the decentralization audit in the integration suite
//! checks that updates to one agent leave the others' parameters
//! bit-identical.

use serde::{Deserialize, Serialize};

use crate::comm::{message_input_width, CommVariant};
use crate::env::{EnvConfig, EnvSession, NUM_ACTIONS};
use crate::error::{Error, Result};
use crate::kmeans::CentroidTable;
use crate::nn::{AdamHyper, AdamState, AgentNet, NetSpec};
use crate::rng::{stream_rng, Stream};

/// Representation dimensionality d: width of the observation encoder's
/// output, and therefore also the centroid dimensionality.
pub const REPR_DIM: usize = 32;

/// One decentralized agent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Agent {
    pub net: AgentNet,
    pub adam: AdamState,
    /// `Some` exactly for clustering variants.
    pub table: Option<CentroidTable>,
}

/// The N agents of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Team {
    pub variant: CommVariant,
    /// Message vocabulary size (centroid count) for clustering variants.
    pub k: usize,
    pub agents: Vec<Agent>,
}

impl Team {
    /// Builds a freshly initialized team for `env`. Each agent draws its
    /// initial parameters from its own RNG stream, so teams of different
    /// sizes still initialize agent i identically.
    pub fn new(
        env: &EnvConfig,
        variant: CommVariant,
        k: usize,
        lr: f64,
        master_seed: u64,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("vocabulary size k must be >= 2, got {k}")));
        }
        let session = EnvSession::new(env)?;
        let n = session.n_agents();
        let spec = NetSpec {
            obs_dim: session.obs_dim(),
            msg_input_width: message_input_width(variant, n, k, REPR_DIM),
            num_actions: NUM_ACTIONS,
            hidden: REPR_DIM,
            spherical: variant.spherical(),
        };
        let mut agents = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = stream_rng(master_seed, Stream::AgentInit(i));
            let net = AgentNet::new(spec, &mut rng);
            let adam = AdamState::new(
                net.param_count(),
                AdamHyper {
                    lr,
                    ..AdamHyper::default()
                },
            );
            let table = if variant.uses_clustering() {
                Some(CentroidTable::uninitialized(k, REPR_DIM)?)
            } else {
                None
            };
            agents.push(Agent { net, adam, table });
        }
        Ok(Self { variant, k, agents })
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    /// Per-agent parameter fingerprints, for the decentralization audit.
    pub fn fingerprints(&self) -> Vec<String> {
        self.agents
            .iter()
            .map(|a| a.net.param_fingerprint())
            .collect()
    }
}
