//! Level-based Foraging (two-agent cooperative variant): two apples on an
//! empty grid, each collectible only when both agents stand 4-adjacent to
//! it and both issue the interact action in the same step. Each collected
//! apple pays +0.5 to each agent; collecting both is success.

use rand_chacha::ChaCha8Rng;

use super::grid::{Grid, Pos};
use super::moves::Action;
use super::world::{Events, GridWorld};

#[derive(Debug, Clone)]
pub struct Foraging {
    grid: Grid,
    positions: Vec<Pos>,
    apples: Vec<Pos>,
    collected: Vec<bool>,
    interior: usize,
    max_steps: usize,
}

impl Foraging {
    pub fn new(interior: usize, max_steps: usize) -> Self {
        Self {
            grid: Grid::walled_box(interior + 2, interior + 2),
            positions: vec![Pos::new(1, 1), Pos::new(1, 2)],
            apples: vec![Pos::new(2, 2), Pos::new(3, 3)],
            collected: vec![false, false],
            interior,
            max_steps,
        }
    }

    pub fn apples(&self) -> Vec<(Pos, bool)> {
        self.apples
            .iter()
            .copied()
            .zip(self.collected.iter().copied())
            .collect()
    }

    fn apple_blocked(&self, p: Pos) -> bool {
        self.apples
            .iter()
            .zip(&self.collected)
            .any(|(a, c)| *a == p && !c)
    }
}

impl GridWorld for Foraging {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn positions(&self) -> &[Pos] {
        &self.positions
    }

    fn channels(&self) -> usize {
        // walls, agents, apples
        3
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) {
        let s = self.interior;
        // One draw of 4 distinct interior cells: two apples, two agents.
        let picks = rand::seq::index::sample(rng, s * s, 4);
        let cell = |i: usize| Pos::new(1 + i / s, 1 + i % s);
        let idx: Vec<usize> = picks.iter().collect();
        self.apples = vec![cell(idx[0]), cell(idx[1])];
        self.positions = vec![cell(idx[2]), cell(idx[3])];
        self.collected = vec![false, false];
    }

    fn step_world(&mut self, actions: &[Action]) -> Events {
        let blocked: Vec<Pos> = self
            .apples
            .iter()
            .zip(&self.collected)
            .filter(|(_, c)| !**c)
            .map(|(a, _)| *a)
            .collect();
        self.move_agents(actions, |p| blocked.contains(&p));
        let mut task = vec![0.0; 2];
        let both_interact = actions.iter().all(|a| *a == Action::Stay);
        if both_interact {
            for i in 0..self.apples.len() {
                if self.collected[i] {
                    continue;
                }
                let a = self.apples[i];
                if self.positions[0].adjacent4(a) && self.positions[1].adjacent4(a) {
                    self.collected[i] = true;
                    task[0] += 0.5;
                    task[1] += 0.5;
                }
            }
        }
        Events {
            task,
            success: self.success_now(),
            failure: false,
        }
    }

    fn move_positions(&mut self) -> &mut Vec<Pos> {
        &mut self.positions
    }

    fn fill_objects(&self, pos: Pos, out: &mut [f64]) {
        if self.apple_blocked(pos) {
            out[2] = 1.0;
        }
    }

    fn success_now(&self) -> bool {
        self.collected.iter().all(|&c| c)
    }

    fn object_char(&self, pos: Pos) -> Option<char> {
        self.apple_blocked(pos).then_some('*')
    }
}
