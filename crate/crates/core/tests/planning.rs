mod common;

use common::*;
use goalnav::grid::GridGeometry;
use goalnav::grid::{Cell, Grid2};
use goalnav::mapping::{CellState, OccupancyMap};
use goalnav::planning::{
    find_frontiers, find_frontiers_in, select_frontier, CellChange, PlanCell, PlanError, PlanGrid, Planner,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check_plan(grid: &PlanGrid, planner: &mut Planner, start: Cell, goal: Cell) -> Result<(), TestCaseError> {
    let oracle = oracle_dijkstra(grid, start, goal);
    match (planner.plan(start, goal), oracle) {
        (Ok(path), Some(best)) => {
            prop_assert!((path.cost - best).abs() < 1e-9, "cost {} vs oracle {}", path.cost, best);
            prop_assert_eq!(path.cells.first(), Some(&start));
            prop_assert_eq!(path.cells.last(), Some(&goal));
            let walked = path_cost(grid, &path.cells);
            prop_assert!(walked.is_some(), "path steps through a blocked cell or cuts a corner");
            prop_assert!((walked.unwrap() - path.cost).abs() < 1e-9);
        }
        (Err(PlanError::NoPath), None) => {}
        (got, want) => prop_assert!(false, "planner {:?} vs oracle {:?}", got.map(|p| p.cost), want),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planner_matches_dijkstra(seed in any::<u64>(), density in 0.0f64..0.45, unexplored in 0.0f64..0.5, penalty in 1.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = random_plan_grid(&mut rng, 30, 30, density, unexplored, penalty);
        let (Some(s), Some(g)) = (random_traversable(&mut rng, &grid), random_traversable(&mut rng, &grid)) else {
            return Ok(());
        };
        let mut planner = Planner::new(grid.clone(), 0);
        check_plan(&grid, &mut planner, s, g)?;
    }

    #[test]
    fn incremental_replans_match_fresh_search(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut grid = random_plan_grid(&mut rng, 25, 25, 0.25, 0.2, 2.0);
        let mut start = Cell::new(0, 0);
        let goal = Cell::new(24, 24);
        grid.set(start, PlanCell::Free);
        grid.set(goal, PlanCell::Free);
        let mut planner = Planner::new(grid.clone(), 0);
        check_plan(&grid, &mut planner, start, goal)?;
        for _ in 0..30 {
            let c = Cell::new(rng.gen_range(0..25), rng.gen_range(0..25));
            if c == start || c == goal {
                continue;
            }
            let old = grid.get(c);
            let new = match (old, rng.gen_range(0..2)) {
                (PlanCell::Blocked, 0) => PlanCell::Free,
                (PlanCell::Blocked, _) => PlanCell::Unexplored,
                _ => PlanCell::Blocked,
            };
            grid.set(c, new);
            planner.update_cells(&[CellChange { cell: c, old, new }]);
            check_plan(&grid, &mut planner, start, goal)?;
            if let Ok(p) = planner.plan(start, goal) {
                if p.cells.len() > 1 && rng.gen_bool(0.5) {
                    start = p.cells[1];
                }
            }
        }
        prop_assert_eq!(planner.resets(), 1);
    }

    #[test]
    fn frontiers_match_brute_force(seed in any::<u64>(), w in 1usize..24, h in 1usize..24) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_trinary(&mut rng, w, h);
        let got: Vec<Vec<Cell>> = find_frontiers_in(&g, Cell::new(0, 0), Cell::new(w as i32 - 1, h as i32 - 1))
            .into_iter()
            .map(|c| {
                assert_eq!(c.size, c.cells.len());
                assert!(c.cells.contains(&c.representative));
                c.cells
            })
            .collect();
        prop_assert_eq!(got, brute_frontiers(&g));
    }

    #[test]
    fn inflation_keeps_clear_of_obstacles(seed in any::<u64>(), r in 0i32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_trinary(&mut rng, 20, 20);
        let mut map = OccupancyMap::new(GridGeometry { width: 20, height: 20, resolution: 0.1, origin: (0.0, 0.0) });
        for (c, s) in g.iter_cells() {
            map.set(c, *s);
        }
        let plan = PlanGrid::from_occupancy(&map, r, 2.0);
        for (c, p) in plan.cells().iter_cells() {
            let mut near = false;
            for dr in -r..=r {
                for dc in -r..=r {
                    near |= map.get(c.offset(dc, dr)) == CellState::Occupied && g.contains(c.offset(dc, dr));
                }
            }
            prop_assert_eq!(*p == PlanCell::Blocked, near, "cell {}", c);
            if !near {
                let want = if map.get(c) == CellState::Free { PlanCell::Free } else { PlanCell::Unexplored };
                prop_assert_eq!(*p, want);
            }
        }
    }

    #[test]
    fn refresh_equals_rebuild(seed in any::<u64>(), r in 0i32..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let geometry = GridGeometry { width: 20, height: 20, resolution: 0.1, origin: (0.0, 0.0) };
        let mut map = OccupancyMap::new(geometry);
        for (c, s) in random_trinary(&mut rng, 20, 20).iter_cells() {
            map.set(c, *s);
        }
        let mut plan = PlanGrid::from_occupancy(&map, r, 2.0);
        let before = plan.clone();
        let mut changed = Vec::new();
        for _ in 0..15 {
            let c = Cell::new(rng.gen_range(0..20), rng.gen_range(0..20));
            let s = [CellState::Free, CellState::Occupied, CellState::Unexplored][rng.gen_range(0..3)];
            if map.get(c) != s {
                map.set(c, s);
                changed.push(c);
            }
        }
        let deltas = plan.refresh(&map, &changed, r);
        prop_assert_eq!(&plan, &PlanGrid::from_occupancy(&map, r, 2.0));
        for d in &deltas {
            prop_assert_eq!(before.get(d.cell), d.old);
            prop_assert_eq!(plan.get(d.cell), d.new);
            prop_assert_ne!(d.old, d.new);
        }
        let moved = plan.cells().iter_cells().filter(|(c, v)| before.get(*c) != **v).count();
        prop_assert_eq!(moved, deltas.len());
    }
}

#[test]
fn map_frontiers_use_explored_bounds() {
    let geometry = GridGeometry {
        width: 40,
        height: 40,
        resolution: 0.1,
        origin: (0.0, 0.0),
    };
    let mut map = OccupancyMap::new(geometry);
    assert!(find_frontiers(&map).is_empty());
    for row in 10..15 {
        for col in 10..20 {
            map.set(Cell::new(col, row), CellState::Free);
        }
    }
    let clusters = find_frontiers(&map);
    assert_eq!(clusters.len(), 1);
    // The ring of a 10x5 free block.
    assert_eq!(clusters[0].size, 2 * 10 + 2 * 3);
    assert_eq!(select_frontier(&clusters), Some(clusters[0].representative));
    let full: Vec<Vec<Cell>> = find_frontiers_in(map.grid(), Cell::new(0, 0), Cell::new(39, 39))
        .into_iter()
        .map(|c| c.cells)
        .collect();
    assert_eq!(full, vec![clusters[0].cells.clone()]);
}

#[test]
fn largest_cluster_wins_and_ties_go_row_major() {
    let mut g = Grid2::new(12, 12, CellState::Unexplored);
    for col in 0..3 {
        *g.get_mut(Cell::new(col, 1)).unwrap() = CellState::Free;
        *g.get_mut(Cell::new(col + 8, 9)).unwrap() = CellState::Free;
    }
    let clusters = find_frontiers_in(&g, Cell::new(0, 0), Cell::new(11, 11));
    assert_eq!(clusters.len(), 2);
    assert_eq!(select_frontier(&clusters), Some(Cell::new(1, 1)));
    *g.get_mut(Cell::new(11, 9)).unwrap() = CellState::Free;
    let clusters = find_frontiers_in(&g, Cell::new(0, 0), Cell::new(11, 11));
    assert_eq!(select_frontier(&clusters), Some(clusters[1].representative));
    assert_eq!(clusters[1].size, 4);
}

#[test]
fn blocked_start_is_reported() {
    let mut grid = PlanGrid::new(5, 5, PlanCell::Free, 2.0);
    grid.set(Cell::new(0, 0), PlanCell::Blocked);
    let mut planner = Planner::new(grid, 0);
    assert_eq!(
        planner.plan(Cell::new(0, 0), Cell::new(4, 4)),
        Err(PlanError::StartBlocked)
    );
}
