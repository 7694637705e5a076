use crate::grid::{Cell, Grid2, NEIGHBORS8};
use crate::mapping::{CellState, OccupancyMap};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontierCluster {
    /// Members in row-major order.
    pub cells: Vec<Cell>,
    pub size: usize,
    pub representative: Cell,
}

/// A Free cell with at least one Unexplored cell among its 8 neighbors.
pub fn is_frontier(grid: &Grid2<CellState>, c: Cell) -> bool {
    grid.value(c) == Some(CellState::Free)
        && NEIGHBORS8
            .iter()
            .any(|&(dc, dr)| grid.value(c.offset(dc, dr)) == Some(CellState::Unexplored))
}

pub fn find_frontiers(map: &OccupancyMap) -> Vec<FrontierCluster> {
    match map.explored_bounds() {
        Some((lo, hi)) => find_frontiers_in(map.grid(), lo, hi),
        None => Vec::new(),
    }
}

/// Clusters of frontier cells inside the inclusive box `lo..=hi`, ordered by
/// their first member's row-major index. Frontier cells outside the box are
/// ignored, so callers pass a box that covers every Free cell.
pub fn find_frontiers_in(grid: &Grid2<CellState>, lo: Cell, hi: Cell) -> Vec<FrontierCluster> {
    let lo = Cell::new(lo.col.max(0), lo.row.max(0));
    let hi = Cell::new(
        hi.col.min(grid.width() as i32 - 1),
        hi.row.min(grid.height() as i32 - 1),
    );
    if lo.col > hi.col || lo.row > hi.row {
        return Vec::new();
    }
    let bw = (hi.col - lo.col + 1) as usize;
    let bh = (hi.row - lo.row + 1) as usize;
    let local = |c: Cell| (c.row - lo.row) as usize * bw + (c.col - lo.col) as usize;
    let inside = |c: Cell| c.col >= lo.col && c.col <= hi.col && c.row >= lo.row && c.row <= hi.row;
    let mut front = vec![false; bw * bh];
    for row in lo.row..=hi.row {
        for col in lo.col..=hi.col {
            let c = Cell::new(col, row);
            front[local(c)] = is_frontier(grid, c);
        }
    }
    let mut seen = vec![false; bw * bh];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for row in lo.row..=hi.row {
        for col in lo.col..=hi.col {
            let seed = Cell::new(col, row);
            let si = local(seed);
            if !front[si] || seen[si] {
                continue;
            }
            seen[si] = true;
            stack.push(seed);
            let mut members = Vec::new();
            while let Some(c) = stack.pop() {
                members.push(c);
                for &(dc, dr) in &NEIGHBORS8 {
                    let n = c.offset(dc, dr);
                    if inside(n) {
                        let ni = local(n);
                        if front[ni] && !seen[ni] {
                            seen[ni] = true;
                            stack.push(n);
                        }
                    }
                }
            }
            members.sort_unstable_by_key(|c| (c.row, c.col));
            out.push(cluster(members));
        }
    }
    out
}

fn cluster(cells: Vec<Cell>) -> FrontierCluster {
    let n = cells.len() as f64;
    let (sc, sr) = cells
        .iter()
        .fold((0i64, 0i64), |(a, b), c| (a + c.col as i64, b + c.row as i64));
    let (mc, mr) = (sc as f64 / n, sr as f64 / n);
    // Members are row-major sorted, so the first strict minimum wins ties.
    let mut best = cells[0];
    let mut best_d = f64::INFINITY;
    for &c in &cells {
        let d = (c.col as f64 - mc).powi(2) + (c.row as f64 - mr).powi(2);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    FrontierCluster {
        size: cells.len(),
        representative: best,
        cells,
    }
}

/// Representative of the largest cluster; ties go to the representative with
/// the smaller row-major index.
pub fn select_frontier(clusters: &[FrontierCluster]) -> Option<Cell> {
    clusters
        .iter()
        .min_by_key(|c| (std::cmp::Reverse(c.size), c.representative.row, c.representative.col))
        .map(|c| c.representative)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridGeometry;

    fn unexplored(n: usize) -> OccupancyMap {
        OccupancyMap::new(GridGeometry {
            width: n,
            height: n,
            resolution: 0.1,
            origin: (0.0, 0.0),
        })
    }

    fn fake(size: usize, rep: Cell) -> FrontierCluster {
        FrontierCluster {
            cells: vec![rep; size],
            size,
            representative: rep,
        }
    }

    #[test]
    fn fully_unexplored_has_none() {
        assert!(find_frontiers(&unexplored(20)).is_empty());
    }

    #[test]
    fn disk_boundary_is_one_ring() {
        let mut m = unexplored(30);
        let center = Cell::new(15, 15);
        for (c, _) in unexplored(30).grid().iter_cells() {
            if c.dist2(center) <= 36 {
                m.set(c, CellState::Free);
            }
        }
        let clusters = find_frontiers(&m);
        assert_eq!(clusters.len(), 1);
        let ring = &clusters[0];
        for &c in &ring.cells {
            assert!(c.dist2(center) <= 36);
            assert!(NEIGHBORS8.iter().any(|&(a, b)| c.offset(a, b).dist2(center) > 36));
        }
        let interior = (0..30)
            .flat_map(|r| (0..30).map(move |c| Cell::new(c, r)))
            .filter(|&c| c.dist2(center) <= 36)
            .filter(|&c| NEIGHBORS8.iter().any(|&(a, b)| c.offset(a, b).dist2(center) > 36))
            .count();
        assert_eq!(ring.size, interior);
    }

    #[test]
    fn selection_rules() {
        assert_eq!(select_frontier(&[]), None);
        let a = fake(40, Cell::new(9, 9));
        let b = fake(7, Cell::new(0, 0));
        let c = fake(7, Cell::new(1, 0));
        assert_eq!(select_frontier(&[b.clone(), a, c.clone()]), Some(Cell::new(9, 9)));
        assert_eq!(select_frontier(&[c, b]), Some(Cell::new(0, 0)));
    }

    #[test]
    fn representative_nearest_centroid() {
        let mut m = unexplored(10);
        for col in 2..=6 {
            m.set(Cell::new(col, 5), CellState::Free);
        }
        let clusters = find_frontiers(&m);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].representative, Cell::new(4, 5));
    }
}
