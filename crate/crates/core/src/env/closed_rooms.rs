//! ClosedRooms: a referential speaker/listener game in two disjoint 3×3
//! rooms. The speaker (agent 0) sees a marked corner in its own room, drawn
//! from two designated corners; the listener (agent 1) must enter the
//! corresponding corner of its room, which it can only learn through the
//! message channel. Entering any corner ends the episode; the speaker also
//! earns +1 for reaching its own marked corner.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::grid::{Grid, Pos};
use super::moves::Action;
use super::world::{Events, GridWorld};

const SPEAKER_START: Pos = Pos { row: 2, col: 2 };
const LISTENER_START: Pos = Pos { row: 2, col: 6 };
/// Designated speaker corners (top-left, bottom-right of the left room).
const SPEAKER_CORNERS: [Pos; 2] = [Pos { row: 1, col: 1 }, Pos { row: 3, col: 3 }];
/// Listener targets: the diagonally opposite corner of the right room.
const LISTENER_TARGETS: [Pos; 2] = [Pos { row: 3, col: 7 }, Pos { row: 1, col: 5 }];
/// All four corners of the listener's room; entering any one terminates.
const LISTENER_CORNERS: [Pos; 4] = [
    Pos { row: 1, col: 5 },
    Pos { row: 1, col: 7 },
    Pos { row: 3, col: 5 },
    Pos { row: 3, col: 7 },
];

#[derive(Debug, Clone)]
pub struct ClosedRooms {
    grid: Grid,
    positions: Vec<Pos>,
    /// Which designated corner is marked (index into the tables above).
    corner_id: usize,
    speaker_rewarded: bool,
    max_steps: usize,
}

impl ClosedRooms {
    pub fn new(max_steps: usize) -> Self {
        let mut grid = Grid::walled_box(5, 9);
        for r in 1..4 {
            grid.set_wall(Pos::new(r, 4));
        }
        Self {
            grid,
            positions: vec![SPEAKER_START, LISTENER_START],
            corner_id: 0,
            speaker_rewarded: false,
            max_steps,
        }
    }

    pub fn marked_corner(&self) -> Pos {
        SPEAKER_CORNERS[self.corner_id]
    }

    pub fn listener_target(&self) -> Pos {
        LISTENER_TARGETS[self.corner_id]
    }
}

impl GridWorld for ClosedRooms {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn positions(&self) -> &[Pos] {
        &self.positions
    }

    fn channels(&self) -> usize {
        3
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) {
        self.positions = vec![SPEAKER_START, LISTENER_START];
        self.corner_id = rng.random_range(0..2);
        self.speaker_rewarded = false;
    }

    fn step_world(&mut self, actions: &[Action]) -> Events {
        self.move_agents(actions, |_| false);
        let mut task = vec![0.0; 2];
        if !self.speaker_rewarded && self.positions[0] == self.marked_corner() {
            self.speaker_rewarded = true;
            task[0] += 1.0;
        }
        let listener = self.positions[1];
        let mut success = false;
        let mut failure = false;
        if LISTENER_CORNERS.contains(&listener) {
            if listener == self.listener_target() {
                task[0] += 1.0;
                task[1] += 1.0;
                success = true;
            } else {
                failure = true;
            }
        }
        Events { task, success, failure }
    }

    fn move_positions(&mut self) -> &mut Vec<Pos> {
        &mut self.positions
    }

    fn fill_objects(&self, pos: Pos, out: &mut [f64]) {
        if pos == self.marked_corner() {
            out[2] = 1.0;
        }
    }

    fn success_now(&self) -> bool {
        self.positions[1] == self.listener_target()
    }

    fn object_char(&self, pos: Pos) -> Option<char> {
        if pos == self.marked_corner() {
            Some('X')
        } else if pos == self.listener_target() {
            Some('x')
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn agents_start_at_their_room_centers() {
        let mut env = ClosedRooms::new(3);
        for seed in 0..20 {
            env.reset(&mut stream_rng(seed, Stream::EnvWorker(0)));
            assert_eq!(env.positions, vec![SPEAKER_START, LISTENER_START]);
        }
    }

    #[test]
    fn both_corners_are_drawn() {
        let mut env = ClosedRooms::new(3);
        let mut seen = [false, false];
        for seed in 0..64 {
            env.reset(&mut stream_rng(seed, Stream::EnvWorker(0)));
            seen[env.corner_id] = true;
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn rooms_are_disjoint() {
        let env = ClosedRooms::new(3);
        for r in 1..4 {
            assert!(env.grid.is_wall(Pos::new(r, 4)));
        }
    }

    #[test]
    fn listener_reaching_the_target_corner_rewards_both() {
        let mut env = ClosedRooms::new(3);
        env.reset(&mut stream_rng(0, Stream::EnvWorker(0)));
        env.corner_id = 0; // target (3,7)
        env.positions[1] = Pos::new(3, 6);
        let ev = env.step_world(&[Action::Stay, Action::Right]);
        assert!(ev.success && !ev.failure);
        assert_eq!(ev.task, vec![1.0, 1.0]);
        assert!(env.success_now());
    }

    #[test]
    fn listener_entering_a_wrong_corner_fails() {
        let mut env = ClosedRooms::new(3);
        env.reset(&mut stream_rng(0, Stream::EnvWorker(0)));
        env.corner_id = 0; // target (3,7); (1,5) is wrong
        env.positions[1] = Pos::new(1, 6);
        let ev = env.step_world(&[Action::Stay, Action::Left]);
        assert!(!ev.success && ev.failure);
        assert_eq!(ev.task, vec![0.0, 0.0]);
    }

    #[test]
    fn speaker_corner_reward_is_paid_once() {
        let mut env = ClosedRooms::new(10);
        env.reset(&mut stream_rng(0, Stream::EnvWorker(0)));
        env.corner_id = 1; // speaker corner (3,3)
        env.positions[0] = Pos::new(3, 2);
        let ev = env.step_world(&[Action::Right, Action::Stay]);
        assert_eq!(ev.task[0], 1.0);
        let ev = env.step_world(&[Action::Left, Action::Stay]);
        assert_eq!(ev.task[0], 0.0);
        let ev = env.step_world(&[Action::Right, Action::Stay]);
        assert_eq!(ev.task[0], 0.0);
    }

    #[test]
    fn scripted_listener_solves_in_two_moves_each_way() {
        for corner_id in 0..2 {
            let mut env = ClosedRooms::new(3);
            env.reset(&mut stream_rng(0, Stream::EnvWorker(0)));
            env.corner_id = corner_id;
            let moves: [Action; 2] = if corner_id == 0 {
                [Action::Down, Action::Right]
            } else {
                [Action::Up, Action::Left]
            };
            let ev = env.step_world(&[Action::Stay, moves[0]]);
            assert!(!ev.success && !ev.failure);
            let ev = env.step_world(&[Action::Stay, moves[1]]);
            assert!(ev.success, "corner {corner_id}");
        }
    }
}
