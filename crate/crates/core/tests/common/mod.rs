//! Independent oracles and scenario builders shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use goalnav::grid::{Cell, Grid2};
use goalnav::localization::{localize, DetectorConfig, GoalMap};
use goalnav::mapping::{ego_to_allo, project_depth_to_ego, CellState, EgoParams, OccupancyMap};
use goalnav::planning::{PlanCell, PlanGrid};
use goalnav::sim::{render, CameraConfig, Pose, Terrain, WorldGrid};
use rand::Rng;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Random planning grid: each cell is Blocked with probability `blocked`,
/// otherwise Unexplored with probability `unexplored`, otherwise Free.
pub fn random_plan_grid<R: Rng>(
    rng: &mut R,
    w: usize,
    h: usize,
    blocked: f64,
    unexplored: f64,
    penalty: f64,
) -> PlanGrid {
    let mut cells = Grid2::new(w, h, PlanCell::Free);
    for v in cells.as_mut_slice() {
        *v = if rng.gen_bool(blocked) {
            PlanCell::Blocked
        } else if rng.gen_bool(unexplored) {
            PlanCell::Unexplored
        } else {
            PlanCell::Free
        };
    }
    PlanGrid::from_cells(cells, penalty)
}

pub fn random_traversable<R: Rng>(rng: &mut R, grid: &PlanGrid) -> Option<Cell> {
    let open: Vec<Cell> = grid
        .cells()
        .iter_cells()
        .filter(|(_, v)| **v != PlanCell::Blocked)
        .map(|(c, _)| c)
        .collect();
    if open.is_empty() {
        None
    } else {
        Some(open[rng.gen_range(0..open.len())])
    }
}

fn weight(grid: &PlanGrid, c: Cell) -> Option<f64> {
    match grid.cells().get(c)? {
        PlanCell::Blocked => None,
        PlanCell::Free => Some(1.0),
        PlanCell::Unexplored => Some(grid.unexplored_penalty()),
    }
}

/// Step cost of the 8-connected model written out from scratch: unit or
/// diagonal length times the mean endpoint weight, no blocked-corner cuts.
pub fn oracle_step(grid: &PlanGrid, a: Cell, b: Cell) -> Option<f64> {
    let (dc, dr) = (b.col - a.col, b.row - a.row);
    if dc.abs() > 1 || dr.abs() > 1 || (dc == 0 && dr == 0) {
        return None;
    }
    let wa = weight(grid, a)?;
    let wb = weight(grid, b)?;
    if dc != 0 && dr != 0 {
        weight(grid, Cell::new(b.col, a.row))?;
        weight(grid, Cell::new(a.col, b.row))?;
        Some(SQRT2 * (wa + wb) / 2.0)
    } else {
        Some((wa + wb) / 2.0)
    }
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Plain Dijkstra over `oracle_step`.
pub fn oracle_dijkstra(grid: &PlanGrid, start: Cell, goal: Cell) -> Option<f64> {
    let cells = grid.cells();
    weight(grid, start)?;
    weight(grid, goal)?;
    let mut dist = vec![f64::INFINITY; cells.len()];
    let mut heap = BinaryHeap::new();
    dist[cells.index(start)] = 0.0;
    heap.push(Item(0.0, cells.index(start)));
    while let Some(Item(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let c = cells.cell(i);
        if c == goal {
            return Some(d);
        }
        for dr in -1..=1 {
            for dc in -1..=1 {
                let n = Cell::new(c.col + dc, c.row + dr);
                if let Some(s) = oracle_step(grid, c, n) {
                    let j = cells.index(n);
                    if d + s < dist[j] {
                        dist[j] = d + s;
                        heap.push(Item(d + s, j));
                    }
                }
            }
        }
    }
    None
}

/// Cost of a cell sequence under the oracle model, `None` if any step is
/// illegal.
pub fn path_cost(grid: &PlanGrid, cells: &[Cell]) -> Option<f64> {
    cells.windows(2).map(|w| oracle_step(grid, w[0], w[1])).sum()
}

pub fn random_trinary<R: Rng>(rng: &mut R, w: usize, h: usize) -> Grid2<CellState> {
    let mut g = Grid2::new(w, h, CellState::Unexplored);
    for v in g.as_mut_slice() {
        *v = match rng.gen_range(0..10) {
            0..=4 => CellState::Free,
            5..=6 => CellState::Occupied,
            _ => CellState::Unexplored,
        };
    }
    g
}

/// Frontier clusters by exhaustive pairwise merging: cells are frontier when
/// Free with an Unexplored 8-neighbor inside the grid, and two frontier cells
/// join when their Chebyshev distance is 1. Members row-major, clusters by
/// first member.
pub fn brute_frontiers(g: &Grid2<CellState>) -> Vec<Vec<Cell>> {
    let mut front = Vec::new();
    for row in 0..g.height() as i32 {
        for col in 0..g.width() as i32 {
            let c = Cell::new(col, row);
            if g.value(c) != Some(CellState::Free) {
                continue;
            }
            let mut any = false;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    if (dc, dr) != (0, 0) && g.value(Cell::new(col + dc, row + dr)) == Some(CellState::Unexplored) {
                        any = true;
                    }
                }
            }
            if any {
                front.push(c);
            }
        }
    }
    let n = front.len();
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (front[i], front[j]);
                if (a.col - b.col).abs() <= 1 && (a.row - b.row).abs() <= 1 && label[j] < label[i] {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out: Vec<Vec<Cell>> = Vec::new();
    let mut roots: Vec<usize> = label.clone();
    roots.sort_unstable();
    roots.dedup();
    for r in roots {
        out.push((0..n).filter(|&i| label[i] == r).map(|i| front[i]).collect());
    }
    out
}

/// Empty room with `side_m` x `side_m` of free interior plus a one-cell wall
/// ring.
pub fn square_room(side_m: f64, res: f64) -> WorldGrid {
    let n = (side_m / res).round() as usize + 2;
    WorldGrid::new(n, n, res).unwrap()
}

/// Turns in place through a full circle in `turns` equal steps, fusing every
/// frame into a map with the world's geometry.
pub fn scan(world: &WorldGrid, x: f64, y: f64, turns: usize, cam: &CameraConfig, ego: &EgoParams) -> OccupancyMap {
    let mut map = OccupancyMap::new(world.geometry());
    for k in 0..turns {
        let pose = Pose::new(x, y, k as f64 * std::f64::consts::TAU / turns as f64);
        let obs = render(world, pose, cam).unwrap();
        let e = project_depth_to_ego(&obs, cam, ego).unwrap();
        let ov = ego_to_allo(&e, pose, map.geometry());
        map.fuse_in_place(&ov).unwrap();
    }
    map
}

/// Ground truth for a 360° scan of a convex empty room from `(x, y)`: free
/// cells whose center is within `range`, and the wall cells sharing an edge
/// with the interior whose interior-facing edge midpoint is within `range`.
pub fn room_visibility(world: &WorldGrid, x: f64, y: f64, range: f64) -> (Vec<Cell>, Vec<Cell>) {
    let res = world.resolution();
    let mut free = Vec::new();
    let mut walls = Vec::new();
    for (c, t) in world.cells().iter_cells() {
        let (cx, cy) = world.center_of(c);
        match t {
            Terrain::Free => {
                if (cx - x).hypot(cy - y) <= range {
                    free.push(c);
                }
            }
            _ => {
                for (dc, dr) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let n = Cell::new(c.col + dc, c.row + dr);
                    if world.cells().value(n) != Some(Terrain::Free) {
                        continue;
                    }
                    let (ex, ey) = (cx + dc as f64 * res / 2.0, cy + dr as f64 * res / 2.0);
                    if (ex - x).hypot(ey - y) <= range {
                        walls.push(c);
                        break;
                    }
                }
            }
        }
    }
    (free, walls)
}

/// Outcome of one goal-localization placement.
pub struct Placement {
    pub truth: Cell,
    pub estimate: Option<Cell>,
}

/// Places a cylinder of color `color` in a 10 m room, stands the agent
/// 1 to 3 m away with the cylinder inside the central part of the view, and
/// localizes from a single frame.
pub fn localization_trial<R: Rng>(rng: &mut R, color: u8) -> Placement {
    let res = 0.1;
    let mut world = square_room(10.0, res);
    let cam = CameraConfig::default();
    loop {
        let truth = Cell::new(rng.gen_range(20..82), rng.gen_range(20..82));
        let (gx, gy) = world.center_of(truth);
        let dist = rng.gen_range(1.0..3.0);
        let bearing: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        // Heading 0 faces +y, so a point at bearing b lies along (-sin b, cos b).
        let (ax, ay) = (gx + dist * bearing.sin(), gy - dist * bearing.cos());
        if !(1.0..9.0).contains(&ax) || !(1.0..9.0).contains(&ay) {
            continue;
        }
        let offset = rng.gen_range(-0.25..0.25) * cam.hfov / 2.0;
        world.place_cylinder(truth, color).unwrap();
        let pose = Pose::new(ax, ay, bearing + offset);
        let obs = render(&world, pose, &cam).unwrap();
        let mut goals = GoalMap::new(world.geometry(), 8);
        localize(&obs, &cam, &DetectorConfig::default(), &mut goals).unwrap();
        return Placement {
            truth,
            estimate: goalnav::localization::estimate_goal_position(&goals, color as usize),
        };
    }
}

/// Hand formula for the path-weighted metrics: `s * d / max(p, d)`.
pub fn weighted_oracle(s: f64, d: f64, p: f64) -> f64 {
    if p.max(d) == 0.0 {
        s
    } else {
        s * d / p.max(d)
    }
}

/// Hand-worked cases: (status, l, p, segment distances, SPL, PPL).
pub fn metric_cases() -> Vec<(goalnav::sim::EpisodeStatus, usize, f64, Vec<f64>, f64, f64)> {
    use goalnav::sim::EpisodeStatus::*;
    vec![
        (Success, 1, 20.0, vec![10.0], 0.5, 0.5),
        (FailTimeout, 1, 10.0, vec![5.0, 4.0, 3.0], 0.0, 1.0 / 6.0),
        (Success, 3, 10.0, vec![2.0, 3.0, 5.0], 1.0, 1.0),
        (Success, 3, 8.0, vec![2.0, 3.0, 5.0], 1.0, 1.0),
        (FailWrongFound, 0, 3.0, vec![5.0, 5.0, 5.0], 0.0, 0.0),
        (FailTimeout, 2, 12.0, vec![3.0, 3.0, 4.0], 0.0, 1.0 / 3.0),
        (Success, 2, 16.0, vec![1.5, 2.5], 0.25, 0.25),
        (Success, 1, 4.0, vec![4.0], 1.0, 1.0),
        (FailWrongFound, 2, 4.0, vec![1.0, 1.0, 1.0], 0.0, 1.0 / 3.0),
        (Success, 3, 60.0, vec![10.0, 10.0, 10.0], 0.5, 0.5),
    ]
}

/// A random valid metrics input; success only when every goal was found.
pub fn random_metrics_input<R: Rng>(rng: &mut R) -> goalnav::metrics::MetricsInput {
    use goalnav::sim::EpisodeStatus::*;
    let k = rng.gen_range(1..=5);
    let d: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..30.0)).collect();
    let l = rng.gen_range(0..=k);
    let status = if l == k {
        Success
    } else if rng.gen_bool(0.5) {
        FailTimeout
    } else {
        FailWrongFound
    };
    let p = if rng.gen_bool(0.05) {
        0.0
    } else {
        rng.gen_range(0.0..200.0)
    };
    goalnav::metrics::MetricsInput::new(status, l, p, d).unwrap()
}

/// Invariants every metrics input must satisfy, `Err` naming the first
/// broken one.
pub fn metric_invariants(input: &goalnav::metrics::MetricsInput) -> Result<(), String> {
    use goalnav::metrics::{ppl, progress, spl, success};
    let (s, pr, sp, pp) = (success(input), progress(input), spl(input), ppl(input));
    let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(format!("{what}: {input:?}")) };
    check((0.0..=1.0).contains(&sp) && (0.0..=1.0).contains(&pp), "range")?;
    check(sp <= s, "spl <= success")?;
    check(pp <= pr, "ppl <= progress")?;
    check(sp <= pp + 1e-15, "spl <= ppl")?;
    let d: f64 = input.segment_geodesics.iter().sum();
    check(
        (sp - weighted_oracle(s, d, input.path_length)).abs() < 1e-12,
        "spl formula",
    )?;
    let c = 3.7;
    let mut scaled = input.clone();
    scaled.path_length *= c;
    scaled.segment_geodesics.iter_mut().for_each(|x| *x *= c);
    check(
        (spl(&scaled) - sp).abs() < 1e-12 && (ppl(&scaled) - pp).abs() < 1e-12,
        "scale invariance",
    )
}

/// Every file under `dir` except `config.toml` (which records the output
/// directory itself), keyed by relative path.
pub fn output_files(dir: &std::path::Path) -> std::collections::BTreeMap<std::path::PathBuf, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n != "config.toml") {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Default configuration shrunk to `n` episodes written under `out`.
pub fn small_run(n: usize, seed: u64, out: &std::path::Path) -> goalnav::harness::RunConfig {
    goalnav::harness::RunConfig {
        seed,
        episode_count: n,
        out_dir: out.to_path_buf(),
        ..Default::default()
    }
}
