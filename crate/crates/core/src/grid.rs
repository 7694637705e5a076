//! Dense 2D grids and cell coordinates shared by the world, the maps and the
//! planner.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer cell coordinate. `row` grows with world `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub col: i32,
    pub row: i32,
}

impl Cell {
    pub const fn new(col: i32, row: i32) -> Self {
        Cell { col, row }
    }

    #[inline]
    pub fn offset(self, dc: i32, dr: i32) -> Cell {
        Cell::new(self.col + dc, self.row + dr)
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.col - other.col).abs().max((self.row - other.row).abs())
    }

    pub fn dist2(self, other: Cell) -> i64 {
        let dc = (self.col - other.col) as i64;
        let dr = (self.row - other.row) as i64;
        dc * dc + dr * dr
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.col, self.row)
    }
}

/// The 8-neighborhood, orthogonal moves first.
pub const NEIGHBORS8: [(i32, i32); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Octile distance in cell units: the 8-connected shortest path length on an
/// obstacle-free grid with unit orthogonal and √2 diagonal steps.
pub fn octile(a: Cell, b: Cell) -> f64 {
    let dx = (a.col - b.col).abs() as f64;
    let dy = (a.row - b.row).abs() as f64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    (hi - lo) + std::f64::consts::SQRT_2 * lo
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid2<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid2<T> {
    pub fn new(width: usize, height: usize, fill: T) -> Self {
        Grid2 {
            width,
            height,
            data: vec![fill; width * height],
        }
    }

    pub fn fill(&mut self, value: T) {
        self.data.iter_mut().for_each(|v| *v = value.clone());
    }
}

impl<T> Grid2<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "grid data has {} cells, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Grid2 { width, height, data })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn contains(&self, c: Cell) -> bool {
        c.col >= 0 && c.row >= 0 && (c.col as usize) < self.width && (c.row as usize) < self.height
    }

    /// Row-major index. Caller guarantees `contains(c)`.
    #[inline]
    pub fn index(&self, c: Cell) -> usize {
        c.row as usize * self.width + c.col as usize
    }

    #[inline]
    pub fn cell(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }

    #[inline]
    pub fn get(&self, c: Cell) -> Option<&T> {
        if self.contains(c) {
            Some(&self.data[self.index(c)])
        } else {
            None
        }
    }

    #[inline]
    pub fn get_mut(&mut self, c: Cell) -> Option<&mut T> {
        if self.contains(c) {
            let i = self.index(c);
            Some(&mut self.data[i])
        } else {
            None
        }
    }

    #[inline]
    pub fn at(&self, index: usize) -> &T {
        &self.data[index]
    }

    #[inline]
    pub fn at_mut(&mut self, index: usize) -> &mut T {
        &mut self.data[index]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (Cell, &T)> + '_ {
        self.data.iter().enumerate().map(move |(i, v)| (self.cell(i), v))
    }
}

impl<T: Copy> Grid2<T> {
    #[inline]
    pub fn value(&self, c: Cell) -> Option<T> {
        self.get(c).copied()
    }
}

/// Placement of a square-cell grid in the world frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    /// Meters per cell.
    pub resolution: f64,
    /// World coordinate of the lower-left corner of cell (0, 0).
    pub origin: (f64, f64),
}

impl GridGeometry {
    /// Cell containing the world point, which is also the cell whose center
    /// is nearest to it. May lie outside the grid.
    #[inline]
    pub fn cell_of(&self, x: f64, y: f64) -> Cell {
        Cell::new(
            ((x - self.origin.0) / self.resolution).floor() as i32,
            ((y - self.origin.1) / self.resolution).floor() as i32,
        )
    }

    #[inline]
    pub fn center_of(&self, c: Cell) -> (f64, f64) {
        (
            self.origin.0 + (c.col as f64 + 0.5) * self.resolution,
            self.origin.1 + (c.row as f64 + 0.5) * self.resolution,
        )
    }

    #[inline]
    pub fn contains(&self, c: Cell) -> bool {
        c.col >= 0 && c.row >= 0 && (c.col as usize) < self.width && (c.row as usize) < self.height
    }

    #[inline]
    pub fn index(&self, c: Cell) -> usize {
        c.row as usize * self.width + c.col as usize
    }

    #[inline]
    pub fn cell(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn same_as(&self, other: &GridGeometry) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.resolution == other.resolution
            && self.origin == other.origin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octile_matches_hand_values() {
        assert_eq!(octile(Cell::new(0, 0), Cell::new(0, 9)), 9.0);
        assert!((octile(Cell::new(0, 0), Cell::new(3, 3)) - 3.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((octile(Cell::new(0, 0), Cell::new(5, 2)) - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn geometry_roundtrips_cells() {
        let g = GridGeometry {
            width: 10,
            height: 10,
            resolution: 0.1,
            origin: (-0.5, -0.5),
        };
        let c = Cell::new(3, 7);
        let (x, y) = g.center_of(c);
        assert_eq!(g.cell_of(x, y), c);
        assert_eq!(g.cell(g.index(c)), c);
    }
}
