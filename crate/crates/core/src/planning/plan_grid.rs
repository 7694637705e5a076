use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, Grid2};
use crate::mapping::{CellState, OccupancyMap};

/// Traversability class of one planning cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlanCell {
    Blocked,
    Free,
    Unexplored,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanParams {
    /// Cost multiplier for stepping through unexplored cells. Must be >= 1.
    pub unexplored_penalty: f64,
    /// Goal snapping radius in cells.
    pub snap_radius: i32,
}

impl Default for PlanParams {
    fn default() -> Self {
        PlanParams {
            unexplored_penalty: 2.0,
            snap_radius: 10,
        }
    }
}

impl PlanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.unexplored_penalty.is_finite() && self.unexplored_penalty >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "unexplored_penalty must be finite and >= 1, got {}",
                self.unexplored_penalty
            )));
        }
        if self.snap_radius < 0 {
            return Err(Error::InvalidInput("snap_radius must be >= 0".into()));
        }
        Ok(())
    }
}

/// A reported change of one planning cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellChange {
    pub cell: Cell,
    pub old: PlanCell,
    pub new: PlanCell,
}

/// Traversability grid the planner searches. Costs are in cell units:
/// 1 per orthogonal step and √2 per diagonal, times the mean multiplier of
/// the two endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanGrid {
    cells: Grid2<PlanCell>,
    unexplored_penalty: f64,
}

impl PlanGrid {
    pub fn new(width: usize, height: usize, fill: PlanCell, unexplored_penalty: f64) -> Self {
        PlanGrid {
            cells: Grid2::new(width, height, fill),
            unexplored_penalty,
        }
    }

    pub fn from_cells(cells: Grid2<PlanCell>, unexplored_penalty: f64) -> Self {
        PlanGrid {
            cells,
            unexplored_penalty,
        }
    }

    /// Inflation radius in cells for an agent of `agent_radius` meters.
    pub fn inflation_cells(agent_radius: f64, resolution: f64) -> i32 {
        (agent_radius / resolution - 1e-9).ceil().max(0.0) as i32
    }

    /// Occupied cells and every cell within `inflation` (Chebyshev) of one are
    /// blocked, remaining Free cells cost 1, Unexplored cells cost the penalty.
    pub fn from_occupancy(map: &OccupancyMap, inflation: i32, unexplored_penalty: f64) -> Self {
        let src = map.grid();
        let (w, h) = (src.width(), src.height());
        let near = dilate_occupied(src, inflation);
        let data = src
            .as_slice()
            .iter()
            .zip(near.as_slice())
            .map(|(&s, &blocked)| classify(s, blocked))
            .collect();
        PlanGrid {
            cells: Grid2::from_vec(w, h, data).expect("sizes match"),
            unexplored_penalty,
        }
    }

    /// Re-derives the cells influenced by `changed` occupancy cells and
    /// returns the resulting planning deltas in row-major order.
    pub fn refresh(&mut self, map: &OccupancyMap, changed: &[Cell], inflation: i32) -> Vec<CellChange> {
        let src = map.grid();
        let mut touched: Vec<usize> = Vec::with_capacity(changed.len() * 4);
        for &c in changed {
            for dr in -inflation..=inflation {
                for dc in -inflation..=inflation {
                    let n = c.offset(dc, dr);
                    if self.cells.contains(n) {
                        touched.push(self.cells.index(n));
                    }
                }
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let mut out = Vec::new();
        for i in touched {
            let c = self.cells.cell(i);
            let mut blocked = false;
            'scan: for dr in -inflation..=inflation {
                for dc in -inflation..=inflation {
                    if src.value(c.offset(dc, dr)) == Some(CellState::Occupied) {
                        blocked = true;
                        break 'scan;
                    }
                }
            }
            let new = classify(*src.at(i), blocked);
            let old = *self.cells.at(i);
            if old != new {
                *self.cells.at_mut(i) = new;
                out.push(CellChange { cell: c, old, new });
            }
        }
        out
    }

    pub fn width(&self) -> usize {
        self.cells.width()
    }

    pub fn height(&self) -> usize {
        self.cells.height()
    }

    pub fn cells(&self) -> &Grid2<PlanCell> {
        &self.cells
    }

    pub fn unexplored_penalty(&self) -> f64 {
        self.unexplored_penalty
    }

    /// Outside the grid reads as Blocked.
    #[inline]
    pub fn get(&self, c: Cell) -> PlanCell {
        self.cells.value(c).unwrap_or(PlanCell::Blocked)
    }

    pub fn set(&mut self, c: Cell, v: PlanCell) -> Option<PlanCell> {
        let slot = self.cells.get_mut(c)?;
        Some(std::mem::replace(slot, v))
    }

    #[inline]
    pub fn is_traversable(&self, c: Cell) -> bool {
        self.get(c) != PlanCell::Blocked
    }

    #[inline]
    pub fn multiplier(&self, c: Cell) -> f64 {
        match self.get(c) {
            PlanCell::Blocked => f64::INFINITY,
            PlanCell::Free => 1.0,
            PlanCell::Unexplored => self.unexplored_penalty,
        }
    }

    /// Cost of the move `a -> a + (dc, dr)` for a unit 8-neighborhood step.
    /// Diagonals may not cut a blocked corner.
    #[inline]
    pub fn edge_cost(&self, a: Cell, dc: i32, dr: i32) -> f64 {
        let b = a.offset(dc, dr);
        let (ma, mb) = (self.multiplier(a), self.multiplier(b));
        if ma.is_infinite() || mb.is_infinite() {
            return f64::INFINITY;
        }
        if dc != 0 && dr != 0 {
            if !self.is_traversable(a.offset(dc, 0)) || !self.is_traversable(a.offset(0, dr)) {
                return f64::INFINITY;
            }
            std::f64::consts::SQRT_2 * (ma + mb) * 0.5
        } else {
            (ma + mb) * 0.5
        }
    }

    /// Nearest traversable cell within `radius` (Euclidean, cells), ties by
    /// row-major index.
    pub fn nearest_traversable(&self, c: Cell, radius: i32) -> Option<Cell> {
        if self.is_traversable(c) {
            return Some(c);
        }
        let mut best: Option<(i64, usize, Cell)> = None;
        let r2 = (radius as i64) * (radius as i64);
        for dr in -radius..=radius {
            for dc in -radius..=radius {
                let n = c.offset(dc, dr);
                let d2 = n.dist2(c);
                if d2 > r2 || !self.cells.contains(n) || !self.is_traversable(n) {
                    continue;
                }
                let key = (d2, self.cells.index(n), n);
                if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                    best = Some(key);
                }
            }
        }
        best.map(|b| b.2)
    }
}

fn classify(s: CellState, near_occupied: bool) -> PlanCell {
    if near_occupied || s == CellState::Occupied {
        PlanCell::Blocked
    } else if s == CellState::Free {
        PlanCell::Free
    } else {
        PlanCell::Unexplored
    }
}

/// `out[c]` is true when an Occupied cell lies within Chebyshev `r` of `c`.
fn dilate_occupied(src: &Grid2<CellState>, r: i32) -> Grid2<bool> {
    let (w, h) = (src.width(), src.height());
    let r = r.max(0) as usize;
    let occ: Vec<bool> = src.as_slice().iter().map(|&s| s == CellState::Occupied).collect();
    // Separable: rows then columns, each a sliding window count.
    let mut tmp = vec![false; w * h];
    for row in 0..h {
        let line = &occ[row * w..(row + 1) * w];
        sliding_any(line, r, &mut tmp[row * w..(row + 1) * w]);
    }
    let mut out = vec![false; w * h];
    let mut col_in = vec![false; h];
    let mut col_out = vec![false; h];
    for col in 0..w {
        for row in 0..h {
            col_in[row] = tmp[row * w + col];
        }
        sliding_any(&col_in, r, &mut col_out);
        for row in 0..h {
            out[row * w + col] = col_out[row];
        }
    }
    Grid2::from_vec(w, h, out).expect("sizes match")
}

fn sliding_any(input: &[bool], r: usize, out: &mut [bool]) {
    let n = input.len();
    let mut count = 0usize;
    // Window for i is [i - r, i + r].
    for v in input.iter().take(r.min(n)) {
        count += *v as usize;
    }
    for i in 0..n {
        if i + r < n && input[i + r] {
            count += 1;
        }
        if i > r && input[i - r - 1] {
            count -= 1;
        }
        out[i] = count > 0;
    }
}
