//! Ground-truth shortest-path distances on the agent-radius-inflated free
//! grid, 8-connected, diagonal steps cost √2 cells and may not cut corners.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::grid::{Cell, Grid2, NEIGHBORS8};

use super::world::WorldGrid;

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable distance oracle for one world.
pub struct Geodesic {
    blocked: Grid2<bool>,
    resolution: f64,
}

impl Geodesic {
    pub fn new(world: &WorldGrid) -> Self {
        Geodesic {
            blocked: world.inflated_blocked(),
            resolution: world.resolution(),
        }
    }

    pub fn blocked(&self) -> &Grid2<bool> {
        &self.blocked
    }

    pub fn is_traversable(&self, c: Cell) -> bool {
        matches!(self.blocked.value(c), Some(false))
    }

    /// Distances in meters from `from` to every cell; `INFINITY` where
    /// unreachable.
    pub fn field(&self, from: Cell) -> Grid2<f64> {
        let (w, h) = (self.blocked.width(), self.blocked.height());
        let mut dist = Grid2::new(w, h, f64::INFINITY);
        if !self.is_traversable(from) {
            return dist;
        }
        let mut heap = BinaryHeap::new();
        let start = dist.index(from);
        *dist.at_mut(start) = 0.0;
        heap.push(Entry {
            dist: 0.0,
            index: start,
        });
        while let Some(Entry { dist: d, index }) = heap.pop() {
            if d > *dist.at(index) {
                continue;
            }
            let c = dist.cell(index);
            for (dc, dr) in NEIGHBORS8 {
                let n = c.offset(dc, dr);
                if !self.is_traversable(n) {
                    continue;
                }
                let diagonal = dc != 0 && dr != 0;
                if diagonal && (!self.is_traversable(c.offset(dc, 0)) || !self.is_traversable(c.offset(0, dr))) {
                    continue;
                }
                let step = if diagonal { std::f64::consts::SQRT_2 } else { 1.0 };
                let nd = d + step * self.resolution;
                let ni = dist.index(n);
                if nd < *dist.at(ni) {
                    *dist.at_mut(ni) = nd;
                    heap.push(Entry { dist: nd, index: ni });
                }
            }
        }
        dist
    }

    pub fn distance(&self, a: (f64, f64), b: (f64, f64)) -> Result<f64> {
        let ca = cell_of(a, self.resolution);
        let cb = cell_of(b, self.resolution);
        for (c, p) in [(ca, a), (cb, b)] {
            if !self.is_traversable(c) {
                return Err(Error::InvalidInput(format!(
                    "point ({}, {}) is not in inflated free space",
                    p.0, p.1
                )));
            }
        }
        if ca == cb {
            return Ok(0.0);
        }
        let d = *self.field(ca).get(cb).expect("checked");
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Unreachable)
        }
    }

    /// The traversable cell nearest to `p` (Euclidean, ties by row-major
    /// index), as its center point.
    pub fn nearest_traversable(&self, p: (f64, f64)) -> Option<(f64, f64)> {
        let target = cell_of(p, self.resolution);
        let mut best: Option<(f64, usize)> = None;
        for radius in 0..self.blocked.width().max(self.blocked.height()) as i32 {
            // Anything at Chebyshev ring `radius` is at least `radius - 1`
            // cells away, so stop once that exceeds the best found.
            if let Some((d, _)) = best {
                if (radius as f64 - 1.0) * self.resolution > d {
                    break;
                }
            }
            for dr in -radius..=radius {
                for dc in -radius..=radius {
                    if dr.abs().max(dc.abs()) != radius {
                        continue;
                    }
                    let c = target.offset(dc, dr);
                    if !self.is_traversable(c) {
                        continue;
                    }
                    let center = (
                        (c.col as f64 + 0.5) * self.resolution,
                        (c.row as f64 + 0.5) * self.resolution,
                    );
                    let d = crate::math::hypot(center.0 - p.0, center.1 - p.1);
                    let idx = self.blocked.index(c);
                    if best.is_none_or(|(bd, bi)| d < bd || (d == bd && idx < bi)) {
                        best = Some((d, idx));
                    }
                }
            }
        }
        best.map(|(_, i)| {
            let c = self.blocked.cell(i);
            (
                (c.col as f64 + 0.5) * self.resolution,
                (c.row as f64 + 0.5) * self.resolution,
            )
        })
    }
}

fn cell_of(p: (f64, f64), res: f64) -> Cell {
    Cell::new((p.0 / res).floor() as i32, (p.1 / res).floor() as i32)
}

/// Shortest obstacle-avoiding distance in meters between two world points.
pub fn geodesic_distance(world: &WorldGrid, a: (f64, f64), b: (f64, f64)) -> Result<f64> {
    Geodesic::new(world).distance(a, b)
}

/// Distance field from `from`, meters.
pub fn geodesic_field(world: &WorldGrid, from: (f64, f64)) -> Grid2<f64> {
    let g = Geodesic::new(world);
    g.field(cell_of(from, world.resolution()))
}

/// Navigable stand-in for a goal cylinder's position: the traversable cell
/// center nearest to the cylinder center.
pub fn goal_point(world: &WorldGrid, color: u8) -> Result<(f64, f64)> {
    let cyl = world
        .cylinder(color)
        .ok_or_else(|| Error::InvalidInput(format!("no cylinder of color {color}")))?;
    Geodesic::new(world)
        .nearest_traversable(cyl.center)
        .ok_or(Error::Unreachable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Terrain;

    #[test]
    fn identity_and_corridor() {
        let w = WorldGrid::new(30, 7, 0.1).unwrap();
        let g = Geodesic::new(&w);
        assert_eq!(g.distance((0.55, 0.35), (0.55, 0.35)).unwrap(), 0.0);
        let d = g.distance((0.55, 0.35), (1.55, 0.35)).unwrap();
        assert!((d - 1.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn walled_off_is_unreachable() {
        let mut w = WorldGrid::new(30, 10, 0.1).unwrap();
        for row in 1..9 {
            w.set(Cell::new(15, row), Terrain::Wall).unwrap();
        }
        let g = Geodesic::new(&w);
        assert!(matches!(
            g.distance((0.55, 0.55), (2.55, 0.55)),
            Err(Error::Unreachable)
        ));
        assert!(g.distance((0.05, 0.55), (0.55, 0.55)).is_err());
    }
}
