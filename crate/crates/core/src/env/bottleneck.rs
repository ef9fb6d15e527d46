//! Bottleneck: two 3×5 rooms joined by a single-cell corridor. All agents
//! spawn in the left room; each earns +1 once upon first crossing into the
//! right room, and the episode succeeds when every agent has crossed.

use rand_chacha::ChaCha8Rng;

use super::grid::{Grid, Pos};
use super::moves::Action;
use super::world::{Events, GridWorld};

/// Grid is 5 rows × 13 cols; the divider sits at this column with the
/// corridor cell in the middle row.
const DIVIDER_COL: usize = 6;
const CORRIDOR: Pos = Pos { row: 2, col: 6 };

#[derive(Debug, Clone)]
pub struct Bottleneck {
    grid: Grid,
    positions: Vec<Pos>,
    crossed: Vec<bool>,
    max_steps: usize,
}

impl Bottleneck {
    pub fn new(n_agents: usize, max_steps: usize) -> Self {
        let mut grid = Grid::walled_box(5, 13);
        for r in 1..4 {
            if Pos::new(r, DIVIDER_COL) != CORRIDOR {
                grid.set_wall(Pos::new(r, DIVIDER_COL));
            }
        }
        Self {
            grid,
            positions: vec![Pos::new(0, 0); n_agents],
            crossed: vec![false; n_agents],
            max_steps,
        }
    }

    fn left_room_cells() -> Vec<Pos> {
        (1..4)
            .flat_map(|r| (1..6).map(move |c| Pos::new(r, c)))
            .collect()
    }

    fn in_right_room(p: Pos) -> bool {
        p.col > DIVIDER_COL
    }
}

impl GridWorld for Bottleneck {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn positions(&self) -> &[Pos] {
        &self.positions
    }

    fn channels(&self) -> usize {
        2
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) {
        let cells = Self::left_room_cells();
        let picks = rand::seq::index::sample(rng, cells.len(), self.positions.len());
        for (slot, i) in picks.iter().enumerate() {
            self.positions[slot] = cells[i];
        }
        self.crossed.fill(false);
    }

    fn step_world(&mut self, actions: &[Action]) -> Events {
        self.move_agents(actions, |_| false);
        let mut task = vec![0.0; self.positions.len()];
        for (i, p) in self.positions.iter().enumerate() {
            if !self.crossed[i] && Self::in_right_room(*p) {
                self.crossed[i] = true;
                task[i] += 1.0;
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

    fn fill_objects(&self, _pos: Pos, _out: &mut [f64]) {}

    fn success_now(&self) -> bool {
        self.crossed.iter().all(|&c| c)
    }

    fn object_char(&self, _pos: Pos) -> Option<char> {
        None
    }
}
