//! Shared behaviour of the four gridworlds.

use rand_chacha::ChaCha8Rng;

use super::grid::{Grid, Pos};
use super::moves::{intended, resolve_moves, Action};

/// Task outcome of one joint step, before step penalties.
#[derive(Debug, Clone)]
pub(crate) struct Events {
    pub task: Vec<f64>,
    pub success: bool,
    pub failure: bool,
}

/// One environment's rules. Channel 0 is walls and channel 1 other agents
/// (filled by the session); `fill_objects` marks channels 2 and up.
pub(crate) trait GridWorld {
    fn grid(&self) -> &Grid;
    fn positions(&self) -> &[Pos];
    fn channels(&self) -> usize;
    fn max_steps(&self) -> usize;
    fn reset(&mut self, rng: &mut ChaCha8Rng);
    /// Movement plus environment events; called once per joint action.
    fn step_world(&mut self, actions: &[Action]) -> Events;
    fn move_positions(&mut self) -> &mut Vec<Pos>;
    fn fill_objects(&self, pos: Pos, out: &mut [f64]);
    /// Success predicate recomputed from the current state.
    fn success_now(&self) -> bool;
    fn object_char(&self, pos: Pos) -> Option<char>;

    fn n_agents(&self) -> usize {
        self.positions().len()
    }

    /// Simultaneous movement with the standard conflict rules; walls plus
    /// `extra_blocked` cells are impassable.
    fn move_agents(&mut self, actions: &[Action], extra_blocked: impl Fn(Pos) -> bool)
    where
        Self: Sized,
    {
        let blocked = |p: Pos| self.grid().is_wall(p) || extra_blocked(p);
        let intents: Vec<Pos> = self
            .positions()
            .iter()
            .zip(actions)
            .map(|(p, a)| intended(*p, *a, &blocked))
            .collect();
        let finals = resolve_moves(self.positions(), &intents);
        *self.move_positions() = finals;
    }
}
