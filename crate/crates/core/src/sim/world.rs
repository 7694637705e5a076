use crate::error::{Error, Result};
use crate::grid::{Cell, Grid2, GridGeometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Terrain {
    Free,
    Wall,
    /// Part of the cylinder with the given palette index.
    Cylinder(u8),
}

/// A goal object: a vertical cylinder whose footprint is the set of cells
/// tagged with its color.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder {
    pub color: u8,
    /// Mean of the centers of its cells.
    pub center: (f64, f64),
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct CylinderTally {
    count: i64,
    sum_col: i64,
    sum_row: i64,
}

/// Ground-truth environment. The world frame has its origin at the
/// lower-left corner of cell (0, 0).
#[derive(Clone, Debug, PartialEq)]
pub struct WorldGrid {
    cells: Grid2<Terrain>,
    resolution: f64,
    cylinder_radius: f64,
    cylinder_height: f64,
    agent_height: f64,
    agent_radius: f64,
    tallies: [CylinderTally; 8],
}

pub const DEFAULT_CYLINDER_RADIUS: f64 = 0.2;
pub const DEFAULT_CYLINDER_HEIGHT: f64 = 1.0;
pub const DEFAULT_AGENT_HEIGHT: f64 = 1.5;
pub const DEFAULT_AGENT_RADIUS: f64 = 0.1;

impl WorldGrid {
    /// An open room: border walls, everything else free.
    pub fn new(width: usize, height: usize, resolution: f64) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::InvalidInput(format!(
                "world must be at least 3x3 cells, got {width}x{height}"
            )));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::InvalidInput(format!("bad resolution {resolution}")));
        }
        let mut cells = Grid2::new(width, height, Terrain::Free);
        for col in 0..width {
            *cells.at_mut(col) = Terrain::Wall;
            *cells.at_mut((height - 1) * width + col) = Terrain::Wall;
        }
        for row in 0..height {
            *cells.at_mut(row * width) = Terrain::Wall;
            *cells.at_mut(row * width + width - 1) = Terrain::Wall;
        }
        Ok(WorldGrid {
            cells,
            resolution,
            cylinder_radius: DEFAULT_CYLINDER_RADIUS,
            cylinder_height: DEFAULT_CYLINDER_HEIGHT,
            agent_height: DEFAULT_AGENT_HEIGHT,
            agent_radius: DEFAULT_AGENT_RADIUS,
            tallies: Default::default(),
        })
    }

    /// Builds a world from raw cells, checking the bounded-world invariant.
    pub fn from_cells(
        cells: Grid2<Terrain>,
        resolution: f64,
        cylinder_radius: f64,
        cylinder_height: f64,
        agent_height: f64,
        agent_radius: f64,
    ) -> Result<Self> {
        let mut world = WorldGrid::new(cells.width(), cells.height(), resolution)?;
        for (c, &t) in cells.iter_cells() {
            if world.is_border(c) && t != Terrain::Wall {
                return Err(Error::InvalidInput(format!("border cell {c} is not a wall")));
            }
            if let Terrain::Cylinder(color) = t {
                if color > 7 {
                    return Err(Error::InvalidInput(format!("cylinder color {color} > 7")));
                }
            }
            world.set(c, t)?;
        }
        world.set_dimensions(cylinder_radius, cylinder_height, agent_height, agent_radius)?;
        Ok(world)
    }

    pub fn set_dimensions(
        &mut self,
        cylinder_radius: f64,
        cylinder_height: f64,
        agent_height: f64,
        agent_radius: f64,
    ) -> Result<()> {
        for (name, v) in [
            ("cylinder_radius", cylinder_radius),
            ("cylinder_height", cylinder_height),
            ("agent_height", agent_height),
            ("agent_radius", agent_radius),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        self.cylinder_radius = cylinder_radius;
        self.cylinder_height = cylinder_height;
        self.agent_height = agent_height;
        self.agent_radius = agent_radius;
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.cells.width()
    }

    pub fn height(&self) -> usize {
        self.cells.height()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cylinder_radius(&self) -> f64 {
        self.cylinder_radius
    }

    pub fn cylinder_height(&self) -> f64 {
        self.cylinder_height
    }

    pub fn agent_height(&self) -> f64 {
        self.agent_height
    }

    pub fn agent_radius(&self) -> f64 {
        self.agent_radius
    }

    pub fn geometry(&self) -> GridGeometry {
        GridGeometry {
            width: self.width(),
            height: self.height(),
            resolution: self.resolution,
            origin: (0.0, 0.0),
        }
    }

    pub fn cells(&self) -> &Grid2<Terrain> {
        &self.cells
    }

    fn is_border(&self, c: Cell) -> bool {
        c.col == 0 || c.row == 0 || c.col as usize == self.width() - 1 || c.row as usize == self.height() - 1
    }

    /// Terrain at `c`; outside the grid everything is wall.
    #[inline]
    pub fn terrain(&self, c: Cell) -> Terrain {
        self.cells.value(c).unwrap_or(Terrain::Wall)
    }

    pub fn set(&mut self, c: Cell, t: Terrain) -> Result<()> {
        if !self.cells.contains(c) {
            return Err(Error::InvalidInput(format!("cell {c} outside world")));
        }
        if self.is_border(c) && t != Terrain::Wall {
            return Err(Error::InvalidInput(format!("border cell {c} must stay a wall")));
        }
        if let Terrain::Cylinder(color) = t {
            if color > 7 {
                return Err(Error::InvalidInput(format!("cylinder color {color} > 7")));
            }
        }
        let i = self.cells.index(c);
        if let Terrain::Cylinder(old) = *self.cells.at(i) {
            let tally = &mut self.tallies[old as usize];
            tally.count -= 1;
            tally.sum_col -= c.col as i64;
            tally.sum_row -= c.row as i64;
        }
        if let Terrain::Cylinder(new) = t {
            let tally = &mut self.tallies[new as usize];
            tally.count += 1;
            tally.sum_col += c.col as i64;
            tally.sum_row += c.row as i64;
        }
        *self.cells.at_mut(i) = t;
        Ok(())
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Cell {
        self.geometry().cell_of(x, y)
    }

    pub fn center_of(&self, c: Cell) -> (f64, f64) {
        self.geometry().center_of(c)
    }

    pub fn cylinder(&self, color: u8) -> Option<Cylinder> {
        let tally = self.tallies.get(color as usize)?;
        if tally.count == 0 {
            return None;
        }
        let n = tally.count as f64;
        let r = self.resolution;
        Some(Cylinder {
            color,
            center: (
                (tally.sum_col as f64 / n + 0.5) * r,
                (tally.sum_row as f64 / n + 0.5) * r,
            ),
            radius: self.cylinder_radius,
        })
    }

    /// All cylinders, ordered by color.
    pub fn cylinders(&self) -> Vec<Cylinder> {
        (0..self.tallies.len() as u8).filter_map(|c| self.cylinder(c)).collect()
    }

    /// Stamps a cylinder centered on cell `center`: every cell whose center
    /// lies within `cylinder_radius` of it.
    pub fn place_cylinder(&mut self, center: Cell, color: u8) -> Result<()> {
        let reach = (self.cylinder_radius / self.resolution).ceil() as i32;
        let r2 = (self.cylinder_radius / self.resolution).powi(2) + 1e-9;
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                if (dc * dc + dr * dr) as f64 <= r2 {
                    self.set(center.offset(dc, dr), Terrain::Cylinder(color))?;
                }
            }
        }
        Ok(())
    }

    /// Cells the agent center may not occupy: every cell within
    /// `ceil(agent_radius / resolution)` cells (Chebyshev) of a non-free cell.
    pub fn inflated_blocked(&self) -> Grid2<bool> {
        let radius = (self.agent_radius / self.resolution).ceil() as usize;
        let (w, h) = (self.width(), self.height());
        let solid: Vec<bool> = self.cells.as_slice().iter().map(|t| *t != Terrain::Free).collect();
        let solid = Grid2::from_vec(w, h, solid).expect("sized");
        dilate_square(&solid, radius)
    }

    /// Whether a disk of radius `r` at `(x, y)` overlaps any non-free cell.
    pub fn disk_collides(&self, x: f64, y: f64, r: f64) -> bool {
        let res = self.resolution;
        let c0 = ((x - r) / res).floor() as i32;
        let c1 = ((x + r) / res).floor() as i32;
        let r0 = ((y - r) / res).floor() as i32;
        let r1 = ((y + r) / res).floor() as i32;
        for row in r0..=r1 {
            for col in c0..=c1 {
                let c = Cell::new(col, row);
                if self.terrain(c) == Terrain::Free {
                    continue;
                }
                let (lx, ly) = (col as f64 * res, row as f64 * res);
                let dx = (lx - x).max(0.0).max(x - (lx + res));
                let dy = (ly - y).max(0.0).max(y - (ly + res));
                if dx * dx + dy * dy < r * r {
                    return true;
                }
            }
        }
        false
    }

    /// Count of free cells.
    pub fn free_count(&self) -> usize {
        self.cells.as_slice().iter().filter(|t| **t == Terrain::Free).count()
    }
}

/// Square (Chebyshev) dilation of a boolean grid, separable in rows and
/// columns.
pub(crate) fn dilate_square(src: &Grid2<bool>, radius: usize) -> Grid2<bool> {
    if radius == 0 {
        return src.clone();
    }
    let (w, h) = (src.width(), src.height());
    let mut rows = Grid2::new(w, h, false);
    for r in 0..h {
        let line = &src.as_slice()[r * w..(r + 1) * w];
        let out = &mut rows.as_mut_slice()[r * w..(r + 1) * w];
        dilate_line(line, out, radius);
    }
    let mut out = Grid2::new(w, h, false);
    let mut col_in = vec![false; h];
    let mut col_out = vec![false; h];
    for c in 0..w {
        for (r, v) in col_in.iter_mut().enumerate() {
            *v = *rows.at(r * w + c);
        }
        dilate_line(&col_in, &mut col_out, radius);
        for (r, v) in col_out.iter().enumerate() {
            *out.at_mut(r * w + c) = *v;
        }
    }
    out
}

fn dilate_line(src: &[bool], out: &mut [bool], radius: usize) {
    let n = src.len();
    // Distance to the nearest set entry on the left and right.
    let mut last: Option<usize> = None;
    for i in 0..n {
        if src[i] {
            last = Some(i);
        }
        out[i] = matches!(last, Some(j) if i - j <= radius);
    }
    let mut next: Option<usize> = None;
    for i in (0..n).rev() {
        if src[i] {
            next = Some(i);
        }
        if matches!(next, Some(j) if j - i <= radius) {
            out[i] = true;
        }
    }
}
