//! D* Lite over a [`PlanGrid`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::grid::{octile, Cell, NEIGHBORS8};

use super::plan_grid::{CellChange, PlanGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("no path")]
    NoPath,
    #[error("start cell is not traversable")]
    StartBlocked,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub cells: Vec<Cell>,
    /// Sum of edge costs, in cell units.
    pub cost: f64,
    /// Goal actually planned to, after snapping.
    pub goal: Cell,
}

type Key = (f64, f64);

const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
struct Entry {
    key: Key,
    index: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Reversed for a min-heap on (k1, k2, index).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .0
            .total_cmp(&self.key.0)
            .then(other.key.1.total_cmp(&self.key.1))
            .then(other.index.cmp(&self.index))
    }
}

fn key_lt(a: Key, b: Key) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

#[derive(Clone, Debug)]
pub struct Planner {
    grid: PlanGrid,
    snap_radius: i32,
    g: Vec<f64>,
    rhs: Vec<f64>,
    queued: Vec<Option<Key>>,
    open: BinaryHeap<Entry>,
    km: f64,
    goal: Option<Cell>,
    last_start: Cell,
    dirty: bool,
    expansions: u64,
    resets: u64,
}

impl Planner {
    pub fn new(grid: PlanGrid, snap_radius: i32) -> Self {
        let n = grid.width() * grid.height();
        Planner {
            grid,
            snap_radius,
            g: vec![f64::INFINITY; n],
            rhs: vec![f64::INFINITY; n],
            queued: vec![None; n],
            open: BinaryHeap::new(),
            km: 0.0,
            goal: None,
            last_start: Cell::new(0, 0),
            dirty: true,
            expansions: 0,
            resets: 0,
        }
    }

    pub fn grid(&self) -> &PlanGrid {
        &self.grid
    }

    /// Vertex expansions since construction.
    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    /// Number of from-scratch searches.
    pub fn resets(&self) -> u64 {
        self.resets
    }

    /// Applies cell deltas. A change whose `old` disagrees with the grid
    /// forces the next `plan` to search from scratch.
    pub fn update_cells(&mut self, changes: &[CellChange]) {
        let mut affected = Vec::with_capacity(changes.len() * 9);
        for ch in changes {
            match self.grid.set(ch.cell, ch.new) {
                Some(prev) if prev == ch.old => {}
                _ => self.dirty = true,
            }
            affected.push(ch.cell);
            for &(dc, dr) in &NEIGHBORS8 {
                affected.push(ch.cell.offset(dc, dr));
            }
        }
        if self.dirty || self.goal.is_none() {
            return;
        }
        let w = self.grid.width();
        affected.retain(|c| self.grid.cells().contains(*c));
        affected.sort_unstable_by_key(|c| c.row as usize * w + c.col as usize);
        affected.dedup();
        for c in affected {
            self.update_vertex(c);
        }
    }

    /// Replaces the whole grid; the next `plan` starts from scratch.
    pub fn reset_grid(&mut self, grid: PlanGrid) {
        let same_size = grid.width() == self.grid.width() && grid.height() == self.grid.height();
        self.grid = grid;
        if !same_size {
            let n = self.grid.width() * self.grid.height();
            self.g = vec![f64::INFINITY; n];
            self.rhs = vec![f64::INFINITY; n];
            self.queued = vec![None; n];
        }
        self.dirty = true;
    }

    pub fn plan(&mut self, start: Cell, goal: Cell) -> Result<Path, PlanError> {
        if !self.grid.is_traversable(start) {
            return Err(PlanError::StartBlocked);
        }
        if !self.grid.cells().contains(goal) && self.snap_radius == 0 {
            return Err(PlanError::NoPath);
        }
        let goal = self
            .grid
            .nearest_traversable(goal, self.snap_radius)
            .ok_or(PlanError::NoPath)?;
        if self.dirty || self.goal != Some(goal) {
            self.initialize(start, goal);
        } else if start != self.last_start {
            self.km += octile(self.last_start, start);
            self.last_start = start;
        }
        self.compute(start);
        self.extract(start, goal)
    }

    fn initialize(&mut self, start: Cell, goal: Cell) {
        self.g.fill(f64::INFINITY);
        self.rhs.fill(f64::INFINITY);
        self.queued.fill(None);
        self.open.clear();
        self.km = 0.0;
        self.goal = Some(goal);
        self.last_start = start;
        self.dirty = false;
        self.resets += 1;
        let gi = self.idx(goal);
        self.rhs[gi] = 0.0;
        self.push(gi, (octile(start, goal), 0.0));
    }

    #[inline]
    fn idx(&self, c: Cell) -> usize {
        c.row as usize * self.grid.width() + c.col as usize
    }

    #[inline]
    fn cell(&self, i: usize) -> Cell {
        let w = self.grid.width();
        Cell::new((i % w) as i32, (i / w) as i32)
    }

    fn calc_key(&self, i: usize) -> Key {
        let m = self.g[i].min(self.rhs[i]);
        (m + octile(self.last_start, self.cell(i)) + self.km, m)
    }

    fn push(&mut self, i: usize, key: Key) {
        self.queued[i] = Some(key);
        self.open.push(Entry { key, index: i });
    }

    /// Drops stale heap entries and returns the live minimum.
    fn top(&mut self) -> Option<Entry> {
        while let Some(&e) = self.open.peek() {
            match self.queued[e.index] {
                Some(k) if k == e.key => return Some(e),
                _ => {
                    self.open.pop();
                }
            }
        }
        None
    }

    fn update_vertex(&mut self, c: Cell) {
        let i = self.idx(c);
        if Some(c) != self.goal {
            let mut best = f64::INFINITY;
            for &(dc, dr) in &NEIGHBORS8 {
                let cost = self.grid.edge_cost(c, dc, dr);
                if cost.is_finite() {
                    let n = c.offset(dc, dr);
                    let v = cost + self.g[self.idx(n)];
                    if v < best {
                        best = v;
                    }
                }
            }
            self.rhs[i] = best;
        }
        if self.g[i] != self.rhs[i] {
            let k = self.calc_key(i);
            self.push(i, k);
        } else {
            self.queued[i] = None;
        }
    }

    fn compute(&mut self, start: Cell) {
        let si = self.idx(start);
        while let Some(top) = self.top() {
            // Ties with the start key are expanded too: rounding can put a
            // vertex of the shortest path a hair above it.
            let start_key = self.calc_key(si);
            if top.key.0 > start_key.0 + TIE_TOLERANCE && self.rhs[si] == self.g[si] {
                break;
            }
            self.expansions += 1;
            let u = top.index;
            let k_new = self.calc_key(u);
            if key_lt(top.key, k_new) {
                self.push(u, k_new);
            } else if self.g[u] > self.rhs[u] {
                self.g[u] = self.rhs[u];
                self.queued[u] = None;
                self.update_neighbors(u);
            } else {
                self.g[u] = f64::INFINITY;
                self.update_neighbors(u);
                self.update_vertex(self.cell(u));
            }
        }
    }

    fn update_neighbors(&mut self, u: usize) {
        let c = self.cell(u);
        for &(dc, dr) in &NEIGHBORS8 {
            let n = c.offset(dc, dr);
            if self.grid.cells().contains(n) {
                self.update_vertex(n);
            }
        }
    }

    fn extract(&self, start: Cell, goal: Cell) -> Result<Path, PlanError> {
        if self.g[self.idx(start)].is_infinite() && start != goal {
            return Err(PlanError::NoPath);
        }
        let mut cells = vec![start];
        let mut cost = 0.0;
        let mut cur = start;
        let limit = self.grid.width() * self.grid.height();
        while cur != goal {
            let mut best: Option<(f64, usize, Cell, f64)> = None;
            for &(dc, dr) in &NEIGHBORS8 {
                let step = self.grid.edge_cost(cur, dc, dr);
                if !step.is_finite() {
                    continue;
                }
                let n = cur.offset(dc, dr);
                let ni = self.idx(n);
                let v = step + self.g[ni];
                if !v.is_finite() {
                    continue;
                }
                if best.is_none_or(|b| v < b.0 || (v == b.0 && ni < b.1)) {
                    best = Some((v, ni, n, step));
                }
            }
            let Some((_, _, n, step)) = best else {
                return Err(PlanError::NoPath);
            };
            cost += step;
            cur = n;
            cells.push(n);
            if cells.len() > limit {
                return Err(PlanError::NoPath);
            }
        }
        Ok(Path { cells, cost, goal })
    }
}

/// Textbook Dijkstra on the same cost model; `None` when unreachable.
pub fn dijkstra_cost(grid: &PlanGrid, start: Cell, goal: Cell) -> Option<f64> {
    if !grid.is_traversable(start) || !grid.is_traversable(goal) {
        return None;
    }
    let w = grid.width();
    let n = w * grid.height();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    let si = start.row as usize * w + start.col as usize;
    dist[si] = 0.0;
    heap.push(Entry {
        key: (0.0, 0.0),
        index: si,
    });
    while let Some(Entry { key, index }) = heap.pop() {
        if key.0 > dist[index] {
            continue;
        }
        let c = Cell::new((index % w) as i32, (index / w) as i32);
        if c == goal {
            return Some(key.0);
        }
        for &(dc, dr) in &NEIGHBORS8 {
            let step = grid.edge_cost(c, dc, dr);
            if !step.is_finite() {
                continue;
            }
            let nb = c.offset(dc, dr);
            let ni = nb.row as usize * w + nb.col as usize;
            let d = key.0 + step;
            if d < dist[ni] {
                dist[ni] = d;
                heap.push(Entry {
                    key: (d, 0.0),
                    index: ni,
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::PlanCell;

    fn open(w: usize, h: usize) -> PlanGrid {
        PlanGrid::new(w, h, PlanCell::Free, 2.0)
    }

    #[test]
    fn start_equals_goal() {
        let mut p = Planner::new(open(5, 5), 0);
        let path = p.plan(Cell::new(2, 2), Cell::new(2, 2)).unwrap();
        assert_eq!(path.cells, vec![Cell::new(2, 2)]);
        assert_eq!(path.cost, 0.0);
    }

    #[test]
    fn straight_line_cost() {
        let mut p = Planner::new(open(10, 10), 0);
        let path = p.plan(Cell::new(0, 0), Cell::new(0, 9)).unwrap();
        assert_eq!(path.cost, 9.0);
        assert_eq!(path.cells.len(), 10);
    }

    #[test]
    fn wall_with_gap_and_disconnection() {
        let mut g = open(7, 7);
        for r in 0..6 {
            g.set(Cell::new(3, r), PlanCell::Blocked);
        }
        let mut p = Planner::new(g.clone(), 0);
        let a = p.plan(Cell::new(0, 0), Cell::new(6, 0)).unwrap();
        assert!((a.cost - dijkstra_cost(&g, Cell::new(0, 0), Cell::new(6, 0)).unwrap()).abs() < 1e-9);
        p.update_cells(&[CellChange {
            cell: Cell::new(3, 6),
            old: PlanCell::Free,
            new: PlanCell::Blocked,
        }]);
        assert_eq!(p.plan(Cell::new(0, 0), Cell::new(6, 0)), Err(PlanError::NoPath));
    }

    #[test]
    fn goal_snaps_out_of_obstacle() {
        let mut g = open(9, 9);
        g.set(Cell::new(4, 4), PlanCell::Blocked);
        let mut p = Planner::new(g.clone(), 2);
        let path = p.plan(Cell::new(0, 4), Cell::new(4, 4)).unwrap();
        assert_eq!(path.goal, Cell::new(4, 3));
        let mut strict = Planner::new(g, 0);
        assert_eq!(strict.plan(Cell::new(0, 4), Cell::new(4, 4)), Err(PlanError::NoPath));
    }

    #[test]
    fn blocked_start_is_an_error() {
        let mut g = open(4, 4);
        g.set(Cell::new(0, 0), PlanCell::Blocked);
        let mut p = Planner::new(g, 0);
        assert_eq!(p.plan(Cell::new(0, 0), Cell::new(3, 3)), Err(PlanError::StartBlocked));
    }

    #[test]
    fn inconsistent_report_falls_back_to_reset() {
        let mut p = Planner::new(open(8, 8), 0);
        p.plan(Cell::new(0, 0), Cell::new(7, 7)).unwrap();
        let before = p.resets();
        p.update_cells(&[CellChange {
            cell: Cell::new(3, 3),
            old: PlanCell::Blocked,
            new: PlanCell::Blocked,
        }]);
        let path = p.plan(Cell::new(0, 0), Cell::new(7, 7)).unwrap();
        assert_eq!(p.resets(), before + 1);
        let oracle = dijkstra_cost(p.grid(), Cell::new(0, 0), Cell::new(7, 7)).unwrap();
        assert!((path.cost - oracle).abs() < 1e-9);
    }

    #[test]
    fn moving_start_reuses_search() {
        let mut p = Planner::new(open(20, 20), 0);
        p.plan(Cell::new(0, 0), Cell::new(19, 19)).unwrap();
        let path = p.plan(Cell::new(1, 1), Cell::new(19, 19)).unwrap();
        assert_eq!(p.resets(), 1);
        assert!((path.cost - 18.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
    }
}
