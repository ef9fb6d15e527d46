//! RedBlueDoors: an empty room with a red door somewhere in the left wall
//! and a blue door in the right wall. Interacting next to a closed door
//! opens it. Opening red first pays +0.25 (shared); opening blue afterwards
//! pays +1 (shared) and succeeds. Opening blue while red is closed fails
//! immediately. Simultaneous interactions resolve in agent-index order.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::grid::{Grid, Pos};
use super::moves::Action;
use super::world::{Events, GridWorld};

#[derive(Debug, Clone)]
pub struct RedBlueDoors {
    grid: Grid,
    positions: Vec<Pos>,
    red: Pos,
    blue: Pos,
    red_open: bool,
    blue_open: bool,
    succeeded: bool,
    interior: usize,
    max_steps: usize,
}

impl RedBlueDoors {
    pub fn new(interior: usize, max_steps: usize) -> Self {
        Self {
            grid: Grid::walled_box(interior + 2, interior + 2),
            positions: vec![Pos::new(1, 1), Pos::new(1, 2)],
            red: Pos::new(1, 0),
            blue: Pos::new(1, interior + 1),
            red_open: false,
            blue_open: false,
            succeeded: false,
            interior,
            max_steps,
        }
    }

    pub fn doors(&self) -> (Pos, Pos) {
        (self.red, self.blue)
    }
}

impl GridWorld for RedBlueDoors {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn positions(&self) -> &[Pos] {
        &self.positions
    }

    fn channels(&self) -> usize {
        // walls, agents, red door, blue door, open flag
        5
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) {
        let s = self.interior;
        // Doors on opposite walls, rows drawn independently.
        self.red = Pos::new(rng.random_range(1..=s), 0);
        self.blue = Pos::new(rng.random_range(1..=s), s + 1);
        let picks = rand::seq::index::sample(rng, s * s, 2);
        for (slot, i) in picks.iter().enumerate() {
            self.positions[slot] = Pos::new(1 + i / s, 1 + i % s);
        }
        self.red_open = false;
        self.blue_open = false;
        self.succeeded = false;
    }

    fn step_world(&mut self, actions: &[Action]) -> Events {
        self.move_agents(actions, |_| false);
        let mut task = vec![0.0; 2];
        let mut success = false;
        let mut failure = false;
        for (i, action) in actions.iter().enumerate() {
            if *action != Action::Stay {
                continue;
            }
            let p = self.positions[i];
            if p.adjacent4(self.red) && !self.red_open {
                self.red_open = true;
                task[0] += 0.25;
                task[1] += 0.25;
            } else if p.adjacent4(self.blue) && !self.blue_open {
                self.blue_open = true;
                if self.red_open {
                    task[0] += 1.0;
                    task[1] += 1.0;
                    success = true;
                    self.succeeded = true;
                } else {
                    failure = true;
                }
                break; // episode over either way
            }
        }
        Events { task, success, failure }
    }

    fn move_positions(&mut self) -> &mut Vec<Pos> {
        &mut self.positions
    }

    fn fill_objects(&self, pos: Pos, out: &mut [f64]) {
        if pos == self.red {
            out[2] = 1.0;
            if self.red_open {
                out[4] = 1.0;
            }
        } else if pos == self.blue {
            out[3] = 1.0;
            if self.blue_open {
                out[4] = 1.0;
            }
        }
    }

    fn success_now(&self) -> bool {
        self.succeeded
    }

    fn object_char(&self, pos: Pos) -> Option<char> {
        if pos == self.red {
            Some(if self.red_open { 'r' } else { 'R' })
        } else if pos == self.blue {
            Some(if self.blue_open { 'b' } else { 'B' })
        } else {
            None
        }
    }
}
