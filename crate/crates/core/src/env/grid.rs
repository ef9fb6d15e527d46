//! Static grid geometry shared by all environments.

use serde::{Deserialize, Serialize};

/// Cell coordinate; row 0 is the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub row: usize,
    pub col: usize,
}

impl Pos {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// 4-neighbourhood adjacency (diagonals excluded).
    pub fn adjacent4(self, other: Pos) -> bool {
        let dr = self.row.abs_diff(other.row);
        let dc = self.col.abs_diff(other.col);
        dr + dc == 1
    }
}

/// Rectangular cell grid with a wall mask. Environments overlay their own
/// objects (doors, apples, marks) on top.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub height: usize,
    pub width: usize,
    walls: Vec<bool>,
}

impl Grid {
    /// All-floor grid with a solid outer border.
    pub fn walled_box(height: usize, width: usize) -> Self {
        let mut grid = Self {
            height,
            width,
            walls: vec![false; height * width],
        };
        for r in 0..height {
            grid.set_wall(Pos::new(r, 0));
            grid.set_wall(Pos::new(r, width - 1));
        }
        for c in 0..width {
            grid.set_wall(Pos::new(0, c));
            grid.set_wall(Pos::new(height - 1, c));
        }
        grid
    }

    pub fn set_wall(&mut self, p: Pos) {
        let w = self.width;
        self.walls[p.row * w + p.col] = true;
    }

    pub fn in_bounds(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub fn is_wall(&self, p: Pos) -> bool {
        self.walls[p.row * self.width + p.col]
    }

    /// Out-of-bounds counts as wall.
    pub fn wall_at(&self, row: i64, col: i64) -> bool {
        if !self.in_bounds(row, col) {
            return true;
        }
        self.is_wall(Pos::new(row as usize, col as usize))
    }
}
