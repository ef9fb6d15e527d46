//! The four partially observable gridworlds behind one step interface.
//!
//! Observations are egocentric 5×5 crops with wall occlusion, binary
//! channels (walls, other agents, env-specific objects), stacked over the
//! three most recent frames. A stacked observation is flattened
//! oldest → newest, channel-major within each frame, so its length is
//! `3 · channels · 25`.
//!
//! Rewards are task rewards minus a step penalty of `1/max_steps` per agent
//! per step; a full failed episode therefore accrues roughly −1.

pub mod bottleneck;
pub mod closed_rooms;
pub mod foraging;
pub mod frame;
pub mod grid;
pub mod moves;
pub mod red_blue_doors;
pub mod view;
mod world;

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use grid::{Grid, Pos};
pub use moves::{Action, NUM_ACTIONS};

use bottleneck::Bottleneck;
use closed_rooms::ClosedRooms;
use foraging::Foraging;
use frame::FrameStack;
use red_blue_doors::RedBlueDoors;
use view::{local_view, VIEW_CELLS};
use world::GridWorld;

/// The benchmark environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvKind {
    Bottleneck,
    ClosedRooms,
    RedBlueDoors,
    Foraging,
}

impl EnvKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "bottleneck" => Ok(EnvKind::Bottleneck),
            "closed-rooms" | "closedrooms" => Ok(EnvKind::ClosedRooms),
            "red-blue-doors" | "redbluedoors" => Ok(EnvKind::RedBlueDoors),
            "foraging" | "lbf" | "level-based-foraging" => Ok(EnvKind::Foraging),
            other => Err(Error::Config(format!(
                "unknown environment '{other}' (expected one of: bottleneck, closed-rooms, \
                 red-blue-doors, foraging)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Bottleneck => "bottleneck",
            EnvKind::ClosedRooms => "closed-rooms",
            EnvKind::RedBlueDoors => "red-blue-doors",
            EnvKind::Foraging => "foraging",
        }
    }

    /// Message vocabulary size used by the clustering variants.
    pub fn default_k(self) -> usize {
        match self {
            EnvKind::Bottleneck | EnvKind::ClosedRooms => 8,
            EnvKind::RedBlueDoors | EnvKind::Foraging => 16,
        }
    }

    pub fn default_n_agents(self) -> usize {
        2
    }

    fn default_max_steps(self, n_agents: usize) -> usize {
        match self {
            EnvKind::Bottleneck => {
                if n_agents >= 4 {
                    60
                } else {
                    30
                }
            }
            // Default chosen so that a random listener's success rate sits
            // at the calibration target (~0.12): a corner is two moves from
            // the start, and longer horizons inflate random success.
            EnvKind::ClosedRooms => 3,
            EnvKind::RedBlueDoors => 288,
            EnvKind::Foraging => 128,
        }
    }
}

impl std::fmt::Display for EnvKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Environment choice plus optional overrides; `None` means the per-env
/// default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub kind: EnvKind,
    #[serde(default)]
    pub n_agents: Option<usize>,
    #[serde(default)]
    pub max_steps: Option<usize>,
    /// Interior side length for RedBlueDoors / Foraging.
    #[serde(default)]
    pub interior: Option<usize>,
}

impl EnvConfig {
    pub fn new(kind: EnvKind) -> Self {
        Self {
            kind,
            n_agents: None,
            max_steps: None,
            interior: None,
        }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents.unwrap_or_else(|| self.kind.default_n_agents())
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
            .unwrap_or_else(|| self.kind.default_max_steps(self.n_agents()))
    }

    pub fn interior(&self) -> usize {
        self.interior.unwrap_or(8)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_agents();
        match self.kind {
            EnvKind::Bottleneck => {
                if !(2..=4).contains(&n) {
                    return Err(Error::Config(format!(
                        "bottleneck supports 2-4 agents, got {n}"
                    )));
                }
            }
            _ => {
                if n != 2 {
                    return Err(Error::Config(format!(
                        "{} is a two-agent environment, got {n}",
                        self.kind
                    )));
                }
            }
        }
        if self.interior.is_some()
            && !matches!(self.kind, EnvKind::RedBlueDoors | EnvKind::Foraging)
        {
            return Err(Error::Config(format!(
                "interior size is only configurable for red-blue-doors and foraging, not {}",
                self.kind
            )));
        }
        if self.interior() < 3 {
            return Err(Error::Config("interior side must be at least 3".into()));
        }
        if self.max_steps() == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Result of one joint step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepResult {
    /// Per-agent stacked observations.
    pub observations: Vec<Vec<f64>>,
    /// Per-agent rewards (task rewards minus the step penalty).
    pub rewards: Vec<f64>,
    pub done: bool,
    pub success: bool,
    pub info: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
enum EnvState {
    Bottleneck(Bottleneck),
    ClosedRooms(ClosedRooms),
    RedBlueDoors(RedBlueDoors),
    Foraging(Foraging),
}

impl EnvState {
    fn world(&self) -> &dyn GridWorld {
        match self {
            EnvState::Bottleneck(e) => e,
            EnvState::ClosedRooms(e) => e,
            EnvState::RedBlueDoors(e) => e,
            EnvState::Foraging(e) => e,
        }
    }

    fn step_world(&mut self, actions: &[Action]) -> world::Events {
        match self {
            EnvState::Bottleneck(e) => e.step_world(actions),
            EnvState::ClosedRooms(e) => e.step_world(actions),
            EnvState::RedBlueDoors(e) => e.step_world(actions),
            EnvState::Foraging(e) => e.step_world(actions),
        }
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) {
        match self {
            EnvState::Bottleneck(e) => e.reset(rng),
            EnvState::ClosedRooms(e) => e.reset(rng),
            EnvState::RedBlueDoors(e) => e.reset(rng),
            EnvState::Foraging(e) => e.reset(rng),
        }
    }
}

/// One live environment: rules plus per-agent frame stacks and episode
/// bookkeeping. Created un-reset; call [`EnvSession::reset`] before
/// stepping.
#[derive(Debug, Clone)]
pub struct EnvSession {
    state: EnvState,
    stacks: Vec<FrameStack>,
    step_count: usize,
    done: bool,
    ever_reset: bool,
}

impl EnvSession {
    pub fn new(cfg: &EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let state = match cfg.kind {
            EnvKind::Bottleneck => {
                EnvState::Bottleneck(Bottleneck::new(cfg.n_agents(), cfg.max_steps()))
            }
            EnvKind::ClosedRooms => EnvState::ClosedRooms(ClosedRooms::new(cfg.max_steps())),
            EnvKind::RedBlueDoors => {
                EnvState::RedBlueDoors(RedBlueDoors::new(cfg.interior(), cfg.max_steps()))
            }
            EnvKind::Foraging => EnvState::Foraging(Foraging::new(cfg.interior(), cfg.max_steps())),
        };
        Ok(Self {
            state,
            stacks: Vec::new(),
            step_count: 0,
            done: true,
            ever_reset: false,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.state.world().n_agents()
    }

    pub fn channels(&self) -> usize {
        self.state.world().channels()
    }

    /// Flattened stacked-observation length: 3 frames × channels × 25.
    pub fn obs_dim(&self) -> usize {
        3 * self.channels() * VIEW_CELLS
    }

    pub fn max_steps(&self) -> usize {
        self.state.world().max_steps()
    }

    pub fn done(&self) -> bool {
        self.done
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn positions(&self) -> &[Pos] {
        self.state.world().positions()
    }

    /// Success predicate recomputed from the current state.
    pub fn success_predicate(&self) -> bool {
        self.state.world().success_now()
    }

    fn observe(&self, agent: usize) -> Vec<f64> {
        let w = self.state.world();
        let positions = w.positions();
        local_view(w.grid(), positions[agent], w.channels(), |pos, out| {
            if positions
                .iter()
                .enumerate()
                .any(|(j, p)| j != agent && *p == pos)
            {
                out[1] = 1.0;
            }
            w.fill_objects(pos, out);
        })
    }

    /// Starts a new episode; returns the initial stacked observations
    /// (all three frames equal to the initial view).
    pub fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        self.state.reset(rng);
        self.step_count = 0;
        self.done = false;
        self.ever_reset = true;
        self.stacks = (0..self.n_agents())
            .map(|i| FrameStack::filled_with(self.observe(i)))
            .collect();
        self.stacks.iter().map(FrameStack::flat).collect()
    }

    /// Applies one joint action. Movement resolves simultaneously, then
    /// environment events; the step penalty applies every step including
    /// the terminal one.
    pub fn step(&mut self, actions: &[Action]) -> Result<StepResult> {
        if !self.ever_reset {
            return Err(Error::Contract("step called before first reset".into()));
        }
        if self.done {
            return Err(Error::Contract(
                "step called on a finished episode (reset first)".into(),
            ));
        }
        if actions.len() != self.n_agents() {
            return Err(Error::Contract(format!(
                "joint action has {} entries for {} agents",
                actions.len(),
                self.n_agents()
            )));
        }
        let events = self.state.step_world(actions);
        self.step_count += 1;
        let timeout = self.step_count >= self.max_steps();
        self.done = events.success || events.failure || timeout;
        let penalty = 1.0 / self.max_steps() as f64;
        let rewards: Vec<f64> = events.task.iter().map(|t| t - penalty).collect();

        for i in 0..self.n_agents() {
            let frame = self.observe(i);
            self.stacks[i].push(frame);
        }
        let observations = self.stacks.iter().map(FrameStack::flat).collect();

        let mut info = BTreeMap::new();
        info.insert("step".to_string(), self.step_count as f64);
        if timeout && !events.success && !events.failure {
            info.insert("timeout".to_string(), 1.0);
        }
        Ok(StepResult {
            observations,
            rewards,
            done: self.done,
            success: events.success,
            info,
        })
    }

    /// ASCII rendering: walls `#`, floor `.`, agents by index, environment
    /// objects by their own letters.
    pub fn render(&self) -> String {
        let w = self.state.world();
        let grid = w.grid();
        let mut out = String::with_capacity((grid.width + 1) * grid.height);
        for r in 0..grid.height {
            for c in 0..grid.width {
                let pos = Pos::new(r, c);
                let ch = if let Some(i) = w.positions().iter().position(|p| *p == pos) {
                    char::from_digit(i as u32, 10).unwrap_or('?')
                } else if let Some(obj) = w.object_char(pos) {
                    obj
                } else if grid.is_wall(pos) {
                    '#'
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}
