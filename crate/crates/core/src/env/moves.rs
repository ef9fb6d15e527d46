//! Simultaneous movement resolution.
//!
//! All agents declare their intended cells at once; conflicts are resolved
//! deterministically: a contested cell goes to the lowest agent index,
//! two agents may not swap through each other, and an agent whose target is
//! (or becomes) occupied by a stayer is blocked. Blocking propagates to a
//! fixpoint, so chains behind a blocked agent stall together, while an agent
//! may follow directly behind one that successfully vacates. Pure rotations
//! of three or more agents are permutations of occupied cells and remain
//! legal.

use serde::{Deserialize, Serialize};

use super::grid::Pos;

/// Joint-action alphabet. `Stay` doubles as the interact action in
/// environments with doors or apples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    /// Stay in place; interpreted as "interact" where applicable.
    Stay,
}

pub const NUM_ACTIONS: usize = 5;

impl Action {
    pub fn from_index(i: usize) -> Action {
        match i {
            0 => Action::Up,
            1 => Action::Down,
            2 => Action::Left,
            3 => Action::Right,
            _ => Action::Stay,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Action::Up => 0,
            Action::Down => 1,
            Action::Left => 2,
            Action::Right => 3,
            Action::Stay => 4,
        }
    }
}

/// Target cell of `action` from `pos`, before conflict checks. Walking into
/// a blocked cell (wall, object, out of bounds) resolves to staying put.
pub fn intended(pos: Pos, action: Action, blocked: &dyn Fn(Pos) -> bool) -> Pos {
    let (dr, dc): (i64, i64) = match action {
        Action::Up => (-1, 0),
        Action::Down => (1, 0),
        Action::Left => (0, -1),
        Action::Right => (0, 1),
        Action::Stay => (0, 0),
    };
    let nr = pos.row as i64 + dr;
    let nc = pos.col as i64 + dc;
    if nr < 0 || nc < 0 {
        return pos;
    }
    let target = Pos::new(nr as usize, nc as usize);
    if blocked(target) {
        pos
    } else {
        target
    }
}

/// Resolves all intents simultaneously; returns final positions. `intents`
/// must already exclude static obstacles (see [`intended`]).
pub fn resolve_moves(positions: &[Pos], intents: &[Pos]) -> Vec<Pos> {
    let n = positions.len();
    let mut finals: Vec<Pos> = intents.to_vec();
    loop {
        let mut changed = false;
        // Contested cell: lowest index keeps it, the rest revert.
        for i in 0..n {
            for j in (i + 1)..n {
                if finals[i] == finals[j] && finals[j] != positions[j] {
                    finals[j] = positions[j];
                    changed = true;
                } else if finals[i] == finals[j] && finals[i] != positions[i] {
                    // j already stays on the contested cell; i cannot enter.
                    finals[i] = positions[i];
                    changed = true;
                }
            }
        }
        // Two-swaps are forbidden: both agents stay.
        for i in 0..n {
            for j in (i + 1)..n {
                let i_moves = finals[i] != positions[i];
                let j_moves = finals[j] != positions[j];
                if i_moves && j_moves && finals[i] == positions[j] && finals[j] == positions[i] {
                    finals[i] = positions[i];
                    finals[j] = positions[j];
                    changed = true;
                }
            }
        }
        // Moving onto a cell whose occupant stays is blocked.
        for i in 0..n {
            if finals[i] == positions[i] {
                continue;
            }
            for j in 0..n {
                if j != i && finals[j] == positions[j] && finals[i] == positions[j] {
                    finals[i] = positions[i];
                    changed = true;
                }
            }
        }
        if !changed {
            return finals;
        }
    }
}
