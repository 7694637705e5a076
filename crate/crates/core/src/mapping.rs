//! Depth → egocentric map → allocentric overlay → global occupancy map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, Grid2, GridGeometry};
use crate::math;
use crate::sim::{CameraConfig, Observation, Pose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[repr(u8)]
pub enum CellState {
    #[default]
    Unexplored = 0,
    Free = 1,
    Occupied = 2,
}

impl CellState {
    /// Within a single frame an obstacle hit outranks a free-space ray.
    #[inline]
    fn merge(self, other: CellState) -> CellState {
        if self as u8 >= other as u8 {
            self
        } else {
            other
        }
    }
}

/// Parameters of the egocentric projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoParams {
    /// Side length N of the square egocentric grid.
    pub size: usize,
    /// Meters per egocentric cell.
    pub resolution: f64,
    /// How far past the visible surface a hit is placed before it is
    /// rasterized, so that it lands inside the obstacle rather than on its
    /// boundary.
    pub surface_depth: f64,
}

impl Default for EgoParams {
    fn default() -> Self {
        EgoParams {
            size: 550,
            resolution: 0.05,
            surface_depth: 0.03,
        }
    }
}

impl EgoParams {
    pub fn with_resolution(resolution: f64) -> Self {
        EgoParams {
            resolution,
            ..Default::default()
        }
    }
}

/// Egocentric top-down grid. The agent sits at the center of cell
/// `(size / 2, 0)` facing +row; columns grow to the agent's right.
#[derive(Clone, Debug, PartialEq)]
pub struct EgoMap {
    cells: Grid2<CellState>,
    resolution: f64,
    touched: Vec<usize>,
}

impl EgoMap {
    pub fn new(size: usize, resolution: f64) -> Self {
        EgoMap {
            cells: Grid2::new(size, size, CellState::Unexplored),
            resolution,
            touched: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.cells.width()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn anchor(&self) -> Cell {
        Cell::new((self.size() / 2) as i32, 0)
    }

    pub fn get(&self, c: Cell) -> CellState {
        self.cells.value(c).unwrap_or(CellState::Unexplored)
    }

    pub fn grid(&self) -> &Grid2<CellState> {
        &self.cells
    }

    /// Egocentric cell containing the point `right` meters to the side and
    /// `forward` meters ahead.
    pub fn cell_at(&self, right: f64, forward: f64) -> Cell {
        let a = self.anchor();
        Cell::new(
            a.col + (right / self.resolution).round() as i32,
            (forward / self.resolution).round() as i32,
        )
    }

    /// (right, forward) offset of a cell center from the agent.
    pub fn offset_of(&self, c: Cell) -> (f64, f64) {
        let a = self.anchor();
        ((c.col - a.col) as f64 * self.resolution, c.row as f64 * self.resolution)
    }

    fn mark(&mut self, c: Cell, state: CellState) {
        if !self.cells.contains(c) {
            return;
        }
        let i = self.cells.index(c);
        let v = self.cells.at_mut(i);
        if *v == CellState::Unexplored {
            self.touched.push(i);
        }
        *v = v.merge(state);
    }

    /// Determined cells in first-touched order.
    pub fn determined(&self) -> impl Iterator<Item = (Cell, CellState)> + '_ {
        self.touched
            .iter()
            .map(move |&i| (self.cells.cell(i), *self.cells.at(i)))
    }

    pub fn count(&self, state: CellState) -> usize {
        self.determined().filter(|(_, s)| *s == state).count()
    }
}

/// Cells on the discrete line from `a` to `b`, both inclusive.
pub fn bresenham(a: Cell, b: Cell) -> Vec<Cell> {
    let (mut x, mut y) = (a.col, a.row);
    let dx = (b.col - a.col).abs();
    let dy = -(b.row - a.row).abs();
    let sx = if a.col < b.col { 1 } else { -1 };
    let sy = if a.row < b.row { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        out.push(Cell::new(x, y));
        if x == b.col && y == b.row {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

/// Back-projects the surface depth of every image column into an
/// egocentric map.
pub fn project_depth_to_ego(obs: &Observation, cam: &CameraConfig, params: &EgoParams) -> Result<EgoMap> {
    if obs.width != cam.width || obs.height != cam.height || obs.depth.len() != cam.width * cam.height {
        return Err(Error::InvalidInput(format!(
            "depth image is {}x{}, camera expects {}x{}",
            obs.width, obs.height, cam.width, cam.height
        )));
    }
    if let Some(bad) = obs.depth.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::InvalidInput(format!("non-positive depth {bad}")));
    }
    if !(params.resolution > 0.0) || params.size < 2 {
        return Err(Error::InvalidInput(
            "ego map needs size >= 2 and positive resolution".into(),
        ));
    }
    let mut ego = EgoMap::new(params.size, params.resolution);
    let anchor = ego.anchor();
    ego.mark(anchor, CellState::Free);
    for u in 0..cam.width {
        let z = (0..cam.height)
            .map(|v| obs.depth[v * cam.width + u])
            .fold(f64::INFINITY, f64::min);
        let lateral = cam.column_tan(u);
        let norm = math::hypot(lateral, 1.0);
        let (dr, df) = (lateral / norm, 1.0 / norm);
        let hit = z < cam.max_range;
        let range = if hit { z * norm } else { cam.max_range };
        let end = ego.cell_at(dr * range, df * range);
        let line = bresenham(anchor, end);
        let free_len = if hit { line.len() - 1 } else { line.len() };
        for &c in &line[..free_len] {
            let (r, f) = ego.offset_of(c);
            if math::hypot(r, f) <= cam.max_range {
                ego.mark(c, CellState::Free);
            }
        }
        if hit {
            let t = range + params.surface_depth;
            ego.mark(ego.cell_at(dr * t, df * t), CellState::Occupied);
        }
    }
    Ok(ego)
}

/// Sparse allocentric overlay produced from one egocentric map.
#[derive(Clone, Debug, PartialEq)]
pub struct Overlay {
    pub geometry: GridGeometry,
    /// Determined cells, sorted by row-major index, each at most once.
    pub cells: Vec<(Cell, CellState)>,
    /// Ego cells that fell outside the target grid.
    pub dropped: usize,
}

/// Rotates every determined ego cell by the heading, translates it by the
/// position and snaps it to the target cell containing it.
pub fn ego_to_allo(ego: &EgoMap, pose: Pose, target: &GridGeometry) -> Overlay {
    let (c, s) = (math::cos(pose.theta), math::sin(pose.theta));
    let mut cells: Vec<(usize, CellState)> = Vec::with_capacity(ego.touched.len());
    let mut dropped = 0;
    for (cell, state) in ego.determined() {
        let (r, f) = ego.offset_of(cell);
        let x = pose.x + r * c - f * s;
        let y = pose.y + r * s + f * c;
        let a = target.cell_of(x, y);
        if target.contains(a) {
            cells.push((target.index(a), state));
        } else {
            dropped += 1;
        }
    }
    cells.sort_unstable_by_key(|(i, _)| *i);
    let mut merged: Vec<(Cell, CellState)> = Vec::with_capacity(cells.len());
    let mut last: Option<usize> = None;
    for (i, st) in cells {
        if last == Some(i) {
            let slot = merged.last_mut().expect("non-empty");
            slot.1 = slot.1.merge(st);
        } else {
            merged.push((target.cell(i), st));
            last = Some(i);
        }
    }
    Overlay {
        geometry: *target,
        cells: merged,
        dropped,
    }
}

/// Global allocentric occupancy map.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyMap {
    geometry: GridGeometry,
    cells: Grid2<CellState>,
    explored: usize,
    bounds: Option<(Cell, Cell)>,
}

impl OccupancyMap {
    pub fn new(geometry: GridGeometry) -> Self {
        OccupancyMap {
            cells: Grid2::new(geometry.width, geometry.height, CellState::Unexplored),
            geometry,
            explored: 0,
            bounds: None,
        }
    }

    /// `size` x `size` map whose center cell is centered on `(x, y)`.
    pub fn centered_at(x: f64, y: f64, size: usize, resolution: f64) -> Self {
        let half = (size / 2) as f64 + 0.5;
        OccupancyMap::new(GridGeometry {
            width: size,
            height: size,
            resolution,
            origin: (x - half * resolution, y - half * resolution),
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &Grid2<CellState> {
        &self.cells
    }

    #[inline]
    pub fn get(&self, c: Cell) -> CellState {
        self.cells.value(c).unwrap_or(CellState::Unexplored)
    }

    pub fn set(&mut self, c: Cell, state: CellState) {
        if let Some(v) = self.cells.get_mut(c) {
            if *v == CellState::Unexplored && state != CellState::Unexplored {
                self.explored += 1;
                self.bounds = Some(match self.bounds {
                    None => (c, c),
                    Some((lo, hi)) => (
                        Cell::new(lo.col.min(c.col), lo.row.min(c.row)),
                        Cell::new(hi.col.max(c.col), hi.row.max(c.row)),
                    ),
                });
            } else if *v != CellState::Unexplored && state == CellState::Unexplored {
                self.explored -= 1;
            }
            *v = state;
        }
    }

    pub fn explored_count(&self) -> usize {
        self.explored
    }

    /// Inclusive bounding box of every cell that has ever been explored.
    pub fn explored_bounds(&self) -> Option<(Cell, Cell)> {
        self.bounds
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Cell {
        self.geometry.cell_of(x, y)
    }

    pub fn center_of(&self, c: Cell) -> (f64, f64) {
        self.geometry.center_of(c)
    }

    /// Writes the overlay in place: Free and Occupied overwrite whatever was
    /// there. Returns the cells whose state changed.
    pub fn fuse_in_place(&mut self, overlay: &Overlay) -> Result<Vec<Cell>> {
        if !self.geometry.same_as(&overlay.geometry) {
            return Err(Error::GeometryMismatch(format!(
                "overlay {:?} vs map {:?}",
                overlay.geometry, self.geometry
            )));
        }
        let mut changed = Vec::new();
        for &(c, st) in &overlay.cells {
            if st == CellState::Unexplored {
                continue;
            }
            if self.get(c) != st {
                self.set(c, st);
                changed.push(c);
            }
        }
        Ok(changed)
    }

    /// Binary PGM: unexplored 127, free 255, occupied 0; top row first.
    pub fn to_pgm(&self) -> Vec<u8> {
        let (w, h) = (self.geometry.width, self.geometry.height);
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        out.reserve(w * h);
        for row in (0..h).rev() {
            for col in 0..w {
                out.push(match *self.cells.at(row * w + col) {
                    CellState::Unexplored => 127,
                    CellState::Free => 255,
                    CellState::Occupied => 0,
                });
            }
        }
        out
    }
}

/// `O_t = fuse(O_{t-1}, a_t)`.
pub fn fuse(global: &OccupancyMap, overlay: &Overlay) -> Result<OccupancyMap> {
    let mut next = global.clone();
    next.fuse_in_place(overlay)?;
    Ok(next)
}
