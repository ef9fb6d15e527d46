//! Egocentric 5×5 observation extraction with wall occlusion.
//!
//! The local view is channel-major: `channels × 25` binary entries, channel
//! 0 reserved for walls. A cell whose line of sight from the agent passes
//! through a wall is masked to the wall channel — agents cannot see through
//! walls. Out-of-bounds cells also read as wall.

use super::grid::{Grid, Pos};

/// Side length of the local view.
pub const VIEW: usize = 5;
/// View radius (cells visible in each direction).
pub const VIEW_RADIUS: i64 = 2;
/// Cells per channel per frame.
pub const VIEW_CELLS: usize = VIEW * VIEW;

/// Integer Bresenham line from `(r0, c0)` to `(r1, c1)`, both inclusive.
fn bresenham(r0: i64, c0: i64, r1: i64, c1: i64) -> Vec<(i64, i64)> {
    let mut cells = Vec::new();
    let dr = (r1 - r0).abs();
    let dc = (c1 - c0).abs();
    let sr = if r0 < r1 { 1 } else { -1 };
    let sc = if c0 < c1 { 1 } else { -1 };
    let mut err = dc - dr;
    let (mut r, mut c) = (r0, c0);
    loop {
        cells.push((r, c));
        if r == r1 && c == c1 {
            break;
        }
        let e2 = 2 * err;
        if e2 > -dr {
            err -= dr;
            c += sc;
        }
        if e2 < dc {
            err += dc;
            r += sr;
        }
    }
    cells
}

/// True when a wall strictly between `from` and the target blocks sight.
/// Endpoints never occlude themselves, so adjacent cells (and walls viewed
/// face-on) are always visible.
pub fn occluded(grid: &Grid, from: Pos, to_row: i64, to_col: i64) -> bool {
    let line = bresenham(from.row as i64, from.col as i64, to_row, to_col);
    line.iter()
        .skip(1)
        .take(line.len().saturating_sub(2))
        .any(|&(r, c)| grid.wall_at(r, c))
}

/// Builds one frame. `fill` receives each visible in-bounds cell and the
/// mutable per-cell channel slice (`channels` wide, entry 0 = wall already
/// set); it marks agents and environment objects.
pub fn local_view<F>(grid: &Grid, center: Pos, channels: usize, mut fill: F) -> Vec<f64>
where
    F: FnMut(Pos, &mut [f64]),
{
    let mut out = vec![0.0; channels * VIEW_CELLS];
    for dr in -VIEW_RADIUS..=VIEW_RADIUS {
        for dc in -VIEW_RADIUS..=VIEW_RADIUS {
            let cell = ((dr + VIEW_RADIUS) as usize) * VIEW + (dc + VIEW_RADIUS) as usize;
            let wr = center.row as i64 + dr;
            let wc = center.col as i64 + dc;
            if !grid.in_bounds(wr, wc) || occluded(grid, center, wr, wc) {
                out[cell] = 1.0; // masked to the wall channel
                continue;
            }
            let pos = Pos::new(wr as usize, wc as usize);
            if grid.is_wall(pos) {
                out[cell] = 1.0;
            }
            // Visible cell: let the environment mark its channels (doors sit
            // on wall cells, so walls are filled too).
            let mut scratch = vec![0.0; channels];
            scratch[0] = out[cell];
            fill(pos, &mut scratch);
            for (ch, v) in scratch.iter().enumerate() {
                out[ch * VIEW_CELLS + cell] = *v;
            }
        }
    }
    out
}
