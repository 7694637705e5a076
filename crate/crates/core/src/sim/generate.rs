//! Seeded procedural episodes: recursive-division rooms with door gaps, then
//! goal cylinders and a start pose with pairwise geodesic separation.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Cell;

use super::geodesic::Geodesic;
use super::world::{Terrain, WorldGrid};
use super::{EpisodeSpec, Pose, SimParams, DEFAULT_PALETTE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationParams {
    pub width_m: f64,
    pub height_m: f64,
    pub resolution: f64,
    /// Probability that a chamber large enough to split gets split. 0 gives
    /// a single open room.
    pub density: f64,
    /// Smallest room side produced by a split.
    pub min_room_m: f64,
    /// Chambers with a side longer than this are always split, whatever the
    /// density. Only applies when density > 0.
    pub max_room_m: f64,
    pub door_width_m: f64,
    /// A dividing wall gets one door per started stretch of this length.
    pub door_spacing_m: f64,
    /// Number of goals per episode.
    pub k: usize,
    /// Palette size the goals are drawn from.
    pub n: usize,
    /// Minimum pairwise geodesic distance between start and goal points.
    pub min_sep_m: f64,
    pub cylinder_radius: f64,
    pub cylinder_height: f64,
    /// Free margin kept around each cylinder.
    pub cylinder_clearance_m: f64,
    pub agent_radius: f64,
    pub agent_height: f64,
    /// When set, the start lies within this Chebyshev distance of the world
    /// center.
    pub start_region_m: Option<f64>,
    pub max_steps: usize,
    pub success_radius: f64,
    pub sim: SimParams,
    pub max_retries: usize,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            width_m: 40.0,
            height_m: 40.0,
            resolution: 0.1,
            density: 0.7,
            min_room_m: 5.0,
            max_room_m: 12.0,
            door_width_m: 1.5,
            door_spacing_m: 8.0,
            k: 3,
            n: 8,
            min_sep_m: 4.0,
            cylinder_radius: super::world::DEFAULT_CYLINDER_RADIUS,
            cylinder_height: super::world::DEFAULT_CYLINDER_HEIGHT,
            cylinder_clearance_m: 0.6,
            agent_radius: super::world::DEFAULT_AGENT_RADIUS,
            agent_height: super::world::DEFAULT_AGENT_HEIGHT,
            // Near the center, so a 55 m agent map covers a 40 m world.
            start_region_m: Some(7.0),
            max_steps: 2500,
            success_radius: 1.5,
            sim: SimParams::default(),
            max_retries: 64,
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if !(self.resolution > 0.0) {
            return bad("resolution must be positive");
        }
        if !(self.width_m > 0.0 && self.height_m > 0.0) {
            return bad("world size must be positive");
        }
        if !(0.0..=1.0).contains(&self.density) {
            return bad("density must lie in [0, 1]");
        }
        if self.n == 0 || self.n > DEFAULT_PALETTE.len() {
            return bad("n must lie in 1..=8");
        }
        if self.k == 0 || self.k > self.n {
            return bad("k must lie in 1..=n");
        }
        if !(self.min_sep_m > 0.0) {
            return bad("min_sep_m must be positive");
        }
        if !(self.door_width_m > 0.0)
            || !(self.min_room_m > 0.0)
            || !(self.max_room_m > 0.0)
            || !(self.door_spacing_m > 0.0)
        {
            return bad("door width and room size must be positive");
        }
        self.sim.validate()
    }

    fn cells(&self, meters: f64) -> i32 {
        (meters / self.resolution).round() as i32
    }
}

pub fn generate_episode(seed: u64, params: &GenerationParams) -> Result<EpisodeSpec> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = params.cells(params.width_m).max(3) as usize;
    let h = params.cells(params.height_m).max(3) as usize;
    let mut world = WorldGrid::new(w, h, params.resolution)?;
    world.set_dimensions(
        params.cylinder_radius,
        params.cylinder_height,
        params.agent_height,
        params.agent_radius,
    )?;
    divide_rooms(&mut world, params, &mut rng)?;

    let goal_sequence: Vec<u8> = sample(&mut rng, params.n, params.k)
        .into_iter()
        .map(|i| i as u8)
        .collect();

    for _ in 0..params.max_retries.max(1) {
        if let Some((start, placed)) = try_place(&world, params, &goal_sequence, &mut rng)? {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            return Ok(EpisodeSpec {
                seed,
                world: placed,
                start: Pose::new(start.0, start.1, theta),
                goal_sequence,
                palette: DEFAULT_PALETTE[..params.n].to_vec(),
                max_steps: params.max_steps,
                success_radius: params.success_radius,
                sim: params.sim,
            });
        }
    }
    Err(Error::Generation(format!(
        "could not place start and {} goals with {} m separation after {} attempts (seed {seed})",
        params.k, params.min_sep_m, params.max_retries
    )))
}

/// Inclusive interior bounds of a chamber.
#[derive(Clone, Copy, Debug)]
struct Chamber {
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
}

fn divide_rooms(world: &mut WorldGrid, params: &GenerationParams, rng: &mut ChaCha8Rng) -> Result<()> {
    if params.density <= 0.0 {
        return Ok(());
    }
    let min_room = params.cells(params.min_room_m).max(2);
    let door = params.cells(params.door_width_m).max(1);
    let max_room = params.cells(params.max_room_m);
    let mut stack = vec![Chamber {
        x0: 1,
        y0: 1,
        x1: world.width() as i32 - 2,
        y1: world.height() as i32 - 2,
    }];
    while let Some(ch) = stack.pop() {
        let cw = ch.x1 - ch.x0 + 1;
        let chh = ch.y1 - ch.y0 + 1;
        let can_v = cw > 2 * min_room;
        let can_h = chh > 2 * min_room;
        if !(can_v || can_h) {
            continue;
        }
        let oversized = cw > max_room || chh > max_room;
        if rng.gen::<f64>() >= params.density && !oversized {
            continue;
        }
        let vertical = match (can_v, can_h) {
            (true, false) => true,
            (false, true) => false,
            _ if cw > chh => true,
            _ if chh > cw => false,
            _ => rng.gen_bool(0.5),
        };
        let (lo, hi, span_lo, span_hi) = if vertical {
            (ch.x0 + min_room, ch.x1 - min_room, ch.y0, ch.y1)
        } else {
            (ch.y0 + min_room, ch.y1 - min_room, ch.x0, ch.x1)
        };
        // The new wall must not butt into a door of the enclosing walls.
        let mut pos = None;
        for _ in 0..24 {
            let p = rng.gen_range(lo..=hi);
            let clear = (-2..=2).all(|d| {
                let ends = if vertical {
                    [Cell::new(p + d, span_lo - 1), Cell::new(p + d, span_hi + 1)]
                } else {
                    [Cell::new(span_lo - 1, p + d), Cell::new(span_hi + 1, p + d)]
                };
                ends.iter().all(|c| world.terrain(*c) == Terrain::Wall)
            });
            if clear {
                pos = Some(p);
                break;
            }
        }
        let Some(p) = pos else { continue };
        let at = |s: i32| if vertical { Cell::new(p, s) } else { Cell::new(s, p) };
        for s in span_lo..=span_hi {
            world.set(at(s), Terrain::Wall)?;
        }
        let len = span_hi - span_lo + 1;
        let doors = 1 + len / params.cells(params.door_spacing_m).max(1);
        let slot = len / doors;
        for i in 0..doors {
            let base = span_lo + i * slot;
            let width = door.min(slot);
            let off = rng.gen_range(0..=(slot - width).max(0));
            for s in base + off..base + off + width {
                world.set(at(s), Terrain::Free)?;
            }
        }
        if vertical {
            stack.push(Chamber { x1: p - 1, ..ch });
            stack.push(Chamber { x0: p + 1, ..ch });
        } else {
            stack.push(Chamber { y1: p - 1, ..ch });
            stack.push(Chamber { y0: p + 1, ..ch });
        }
    }
    Ok(())
}

type Placement = ((f64, f64), WorldGrid);

fn try_place(
    world: &WorldGrid,
    params: &GenerationParams,
    goals: &[u8],
    rng: &mut ChaCha8Rng,
) -> Result<Option<Placement>> {
    let geo = Geodesic::new(world);
    let res = world.resolution();
    let (cx, cy) = (world.width() as f64 * res / 2.0, world.height() as f64 * res / 2.0);
    let in_region = |c: Cell| {
        let (x, y) = world.center_of(c);
        params
            .start_region_m
            .is_none_or(|r| (x - cx).abs() <= r && (y - cy).abs() <= r)
    };
    let starts: Vec<Cell> = geo
        .blocked()
        .iter_cells()
        .filter(|(c, b)| !**b && in_region(*c))
        .map(|(c, _)| c)
        .collect();
    if starts.is_empty() {
        return Err(Error::Generation("no free start cell in the start region".into()));
    }
    let start = starts[rng.gen_range(0..starts.len())];
    let reach = geo.field(start);
    let reachable: Vec<Cell> = reach
        .iter_cells()
        .filter(|(_, d)| d.is_finite())
        .map(|(c, _)| c)
        .collect();

    let keep = ((params.cylinder_radius + params.cylinder_clearance_m) / res).ceil() as i32;
    let mut placed = world.clone();
    let mut centers: Vec<Cell> = Vec::new();
    for &color in goals {
        let mut chosen = None;
        for _ in 0..256 {
            let c = reachable[rng.gen_range(0..reachable.len())];
            let clear =
                (-keep..=keep).all(|dr| (-keep..=keep).all(|dc| placed.terrain(c.offset(dc, dr)) == Terrain::Free));
            let far_from_start = c.chebyshev(start) > keep + 2;
            if clear && far_from_start {
                chosen = Some(c);
                break;
            }
        }
        let Some(c) = chosen else { return Ok(None) };
        placed.place_cylinder(c, color)?;
        centers.push(c);
    }

    // Separation is checked on the final world, cylinders included.
    let geo = Geodesic::new(&placed);
    let start_pt = placed.center_of(start);
    if !geo.is_traversable(start) {
        return Ok(None);
    }
    let mut points = vec![start_pt];
    for &color in goals {
        let cyl = placed.cylinder(color).expect("placed");
        match geo.nearest_traversable(cyl.center) {
            Some(p) => points.push(p),
            None => return Ok(None),
        }
    }
    for (i, &p) in points.iter().enumerate() {
        let field = geo.field(placed.cell_of(p.0, p.1));
        for &q in &points[i + 1..] {
            let d = *field.get(placed.cell_of(q.0, q.1)).expect("inside");
            if !(d >= params.min_sep_m) || !d.is_finite() {
                return Ok(None);
            }
        }
    }
    Ok(Some((start_pt, placed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GenerationParams {
        GenerationParams {
            width_m: 16.0,
            height_m: 16.0,
            min_room_m: 3.0,
            min_sep_m: 2.0,
            ..Default::default()
        }
    }

    #[test]
    fn same_seed_same_episode() {
        let a = generate_episode(7, &small()).unwrap();
        let b = generate_episode(7, &small()).unwrap();
        assert_eq!(a, b);
        let c = generate_episode(8, &small()).unwrap();
        assert_ne!(a.world, c.world);
    }

    #[test]
    fn goals_are_distinct_palette_colors() {
        for seed in 0..10 {
            let spec = generate_episode(seed, &small()).unwrap();
            assert_eq!(spec.goal_sequence.len(), 3);
            let mut g = spec.goal_sequence.clone();
            g.sort();
            g.dedup();
            assert_eq!(g.len(), 3);
            assert!(g.iter().all(|&c| c < 8));
            assert_eq!(spec.world.cylinders().len(), 3);
        }
    }

    #[test]
    fn zero_density_is_one_open_room() {
        let p = GenerationParams {
            density: 0.0,
            ..small()
        };
        let spec = generate_episode(3, &p).unwrap();
        for (c, t) in spec.world.cells().iter_cells() {
            let border = c.col == 0
                || c.row == 0
                || c.col as usize == spec.world.width() - 1
                || c.row as usize == spec.world.height() - 1;
            match t {
                Terrain::Wall => assert!(border, "interior wall at {c}"),
                Terrain::Free => assert!(!border),
                Terrain::Cylinder(_) => {}
            }
        }
    }

    #[test]
    fn impossible_separation_is_an_error() {
        let p = GenerationParams {
            min_sep_m: 500.0,
            max_retries: 3,
            ..small()
        };
        assert!(matches!(generate_episode(1, &p), Err(Error::Generation(_))));
    }
}
