//! Per-step agent: mapping and goal localization feed a choice between
//! navigating to the localized goal and frontier exploration.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{octile, Cell, Grid2, GridGeometry, NEIGHBORS8};
use crate::localization::{estimate_goal_position, localize, DetectorConfig, GoalMap};
use crate::mapping::{bresenham, ego_to_allo, project_depth_to_ego, CellState, EgoParams, OccupancyMap};
use crate::math;
use crate::planning::{
    find_frontiers, is_frontier, select_frontier, CellChange, FrontierCluster, PlanCell, PlanError, PlanGrid, Planner,
};
use crate::sim::{Action, CameraConfig, Observation, Pose, Rgb};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// Side M of the square global maps, in cells.
    pub map_size: usize,
    pub map_resolution: f64,
    pub ego: EgoParams,
    pub epsilon: f64,
    pub delta: usize,
    pub success_radius: f64,
    /// Found is called this much inside the success radius.
    pub found_margin: f64,
    pub unexplored_penalty: f64,
    pub agent_radius: f64,
    /// Extra obstacle clearance added to the agent radius when planning.
    pub clearance_m: f64,
    /// Goal snapping radius in cells.
    pub snap_radius: i32,
    /// Waypoint lookahead along the path, in cells.
    pub lookahead: usize,
    /// Steer further ahead, up to this many cells, while the straight line
    /// stays traversable.
    pub max_lookahead: usize,
    /// After a forward move, keep moving forward while the heading error is
    /// within this fraction of the turn angle.
    pub hold_band: f64,
    /// When positive, a frontier is worth the unexplored area reachable
    /// within this radius of its entry point instead of its cluster size.
    pub gain_radius_m: f64,
    /// Frontier targets are re-selected at least this often, in steps.
    pub refresh_period: usize,
    /// Repeats of the same (pose, mode, target) tolerated without new map
    /// information.
    pub loop_limit: usize,
    /// A frontier target within this distance counts as reached.
    pub reach_m: f64,
    /// At a periodic refresh, switch clusters only when another one is this
    /// many times better than the current target's.
    pub switch_ratio: f64,
    /// A frontier target stays valid while a frontier cell lies within this
    /// distance of it.
    pub keep_m: f64,
    /// Spin in place before the first move.
    pub initial_scan: bool,
    /// Block size of the least-recently-visited coverage fallback.
    pub coverage_block_m: f64,
    /// Frontier worth is discounted by exp(-travel / decay). Zero falls
    /// back to picking the largest cluster.
    pub frontier_decay_m: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            map_size: 550,
            map_resolution: 0.1,
            ego: EgoParams::default(),
            epsilon: 0.001,
            delta: 50,
            success_radius: 1.5,
            found_margin: 0.3,
            unexplored_penalty: 2.0,
            agent_radius: crate::sim::DEFAULT_AGENT_RADIUS,
            clearance_m: 0.2,
            snap_radius: 10,
            lookahead: 5,
            max_lookahead: 30,
            hold_band: 1.0,
            gain_radius_m: 5.0,
            refresh_period: 10,
            loop_limit: 6,
            reach_m: 0.5,
            keep_m: 1.0,
            switch_ratio: 1.5,
            initial_scan: true,
            coverage_block_m: 2.0,
            frontier_decay_m: 10.0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if self.map_size < 3 || !(self.map_resolution > 0.0) {
            return bad("map_size must be >= 3 and map_resolution positive");
        }
        if !(self.success_radius > 0.0) || !(self.found_margin >= 0.0) {
            return bad("success_radius must be positive and found_margin non-negative");
        }
        if self.found_distance() < 0.0 {
            return bad("found_margin exceeds success_radius");
        }
        if !(self.agent_radius >= 0.0) || !(self.clearance_m >= 0.0) {
            return bad("agent_radius and clearance_m must be non-negative");
        }
        if !(self.unexplored_penalty >= 1.0) || !self.unexplored_penalty.is_finite() {
            return bad("unexplored_penalty must be finite and >= 1");
        }
        if self.snap_radius < 0 || self.lookahead == 0 || self.refresh_period == 0 || self.loop_limit == 0 {
            return bad("snap_radius, lookahead, refresh_period and loop_limit must be positive");
        }
        if !(self.hold_band >= 0.0) || !(self.gain_radius_m >= 0.0) || !(self.frontier_decay_m >= 0.0) {
            return bad("hold_band, gain_radius_m and frontier_decay_m must be non-negative");
        }
        if !(self.switch_ratio >= 1.0) {
            return bad("switch_ratio must be >= 1");
        }
        if !(self.reach_m >= 0.0) || !(self.keep_m >= 0.0) || !(self.coverage_block_m > 0.0) {
            return bad("reach_m and keep_m must be non-negative, coverage_block_m positive");
        }
        if !(self.ego.resolution > 0.0) || self.ego.size < 2 {
            return bad("ego map needs size >= 2 and positive resolution");
        }
        Ok(())
    }

    pub fn found_distance(&self) -> f64 {
        self.success_radius - self.found_margin
    }

    /// Inflation radius of the planning grid, in cells.
    pub fn inflation_cells(&self) -> i32 {
        PlanGrid::inflation_cells(self.agent_radius + self.clearance_m, self.map_resolution)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Explore,
    NavigateToGoal,
}

/// One step's choice plus the context that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub action: Action,
    pub mode: Mode,
    pub target: Option<Cell>,
}

type LoopKey = (Cell, i64, Mode, Option<Cell>);

/// Complete agent state for one episode.
#[derive(Clone, Debug)]
pub struct AgentState {
    cfg: AgentConfig,
    cam: CameraConfig,
    turn_angle: f64,
    detector: DetectorConfig,
    goal_colors: Vec<u8>,
    inflation: i32,
    pub mode: Mode,
    pub current_goal_index: usize,
    pub active_target: Option<Cell>,
    pub planner: Planner,
    pub occupancy: OccupancyMap,
    /// The occupancy map with obstacles made permanent; planning reads this.
    plan_map: OccupancyMap,
    pub goal_map: GoalMap,
    plan_grid: PlanGrid,
    bumps: Grid2<bool>,
    banned: Grid2<bool>,
    target_age: usize,
    spin_left: usize,
    exhausted: bool,
    spin_len: usize,
    coverage_target: Option<Cell>,
    visits: Grid2<i64>,
    block_cells: i32,
    loops: HashMap<LoopKey, usize>,
    last_explored: usize,
    steps: usize,
    last_action: Option<Action>,
}

impl AgentState {
    pub fn new(
        cfg: AgentConfig,
        start: Pose,
        goal_colors: Vec<u8>,
        palette: Vec<Rgb>,
        cam: CameraConfig,
        turn_angle: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        cam.validate()?;
        let detector = DetectorConfig {
            epsilon: cfg.epsilon,
            delta: cfg.delta,
            palette,
        };
        detector.validate()?;
        if let Some(&c) = goal_colors.iter().find(|&&c| c as usize >= detector.palette.len()) {
            return Err(Error::InvalidInput(format!("goal color {c} outside the palette")));
        }
        if !(turn_angle > 0.0) {
            return Err(Error::InvalidInput("turn_angle must be positive".into()));
        }
        let occupancy = OccupancyMap::centered_at(start.x, start.y, cfg.map_size, cfg.map_resolution);
        let geometry = *occupancy.geometry();
        let goal_map = GoalMap::new(geometry, detector.palette.len());
        let inflation = cfg.inflation_cells();
        let plan_grid = PlanGrid::from_occupancy(&occupancy, inflation, cfg.unexplored_penalty);
        let planner = Planner::new(plan_grid.clone(), cfg.snap_radius);
        let block_cells = ((cfg.coverage_block_m / cfg.map_resolution).round() as i32).max(1);
        let blocks = (cfg.map_size as i32 + block_cells - 1) / block_cells;
        let spin_len = (std::f64::consts::TAU / turn_angle - 1e-9).ceil() as usize;
        let spin_left = if cfg.initial_scan { spin_len } else { 0 };
        Ok(AgentState {
            bumps: Grid2::new(cfg.map_size, cfg.map_size, false),
            banned: Grid2::new(cfg.map_size, cfg.map_size, false),
            visits: Grid2::new(blocks as usize, blocks as usize, -1),
            cfg,
            cam,
            turn_angle,
            detector,
            goal_colors,
            inflation,
            mode: Mode::Explore,
            current_goal_index: 0,
            active_target: None,
            planner,
            plan_map: occupancy.clone(),
            occupancy,
            goal_map,
            plan_grid,
            target_age: 0,
            spin_left,
            exhausted: false,
            spin_len,
            coverage_target: None,
            block_cells,
            loops: HashMap::new(),
            last_explored: 0,
            steps: 0,
            last_action: None,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn geometry(&self) -> &GridGeometry {
        self.occupancy.geometry()
    }

    pub fn current_color(&self) -> Option<u8> {
        self.goal_colors.get(self.current_goal_index).copied()
    }

    /// Goal estimate for the current color.
    pub fn goal_estimate(&self) -> Option<Cell> {
        estimate_goal_position(&self.goal_map, self.current_color()? as usize)
    }

    /// Feeds back the result of the last action.
    pub fn acknowledge(&mut self, pose_before: Pose, collided: bool, goals_found: usize) {
        if goals_found > self.current_goal_index {
            self.current_goal_index = goals_found.min(self.goal_colors.len());
            self.active_target = None;
            self.spin_left = 0;
            self.loops.clear();
        }
        if collided {
            self.mark_bump(pose_before);
        }
    }

    /// Runs mapping and localization on `obs`, then picks the next action.
    pub fn decide(&mut self, obs: &Observation) -> Result<Decision> {
        self.update_maps(obs)?;
        let pose = obs.pose;
        let decision = self.choose(pose);
        self.steps += 1;
        self.last_action = Some(decision.action);
        Ok(decision)
    }

    fn update_maps(&mut self, obs: &Observation) -> Result<()> {
        let ego = project_depth_to_ego(obs, &self.cam, &self.cfg.ego)?;
        let overlay = ego_to_allo(&ego, obs.pose, self.occupancy.geometry());
        let mut changed = self.occupancy.fuse_in_place(&overlay)?;
        // Obstacles stay put for planning; a later grazing ray that clears
        // an obstacle cell only reflects rounding.
        changed.retain(|&c| {
            let now = self.occupancy.get(c);
            let keep = self.plan_map.get(c) != CellState::Occupied && self.plan_map.get(c) != now;
            if keep {
                self.plan_map.set(c, now);
            }
            keep
        });
        if !changed.is_empty() {
            let mut deltas = self.plan_grid.refresh(&self.plan_map, &changed, self.inflation);
            self.reapply_bumps(&mut deltas);
            self.planner.update_cells(&deltas);
        }
        localize(obs, &self.cam, &self.detector, &mut self.goal_map)?;
        let here = self.occupancy.cell_of(obs.pose.x, obs.pose.y);
        let b = Cell::new(
            here.col.div_euclid(self.block_cells),
            here.row.div_euclid(self.block_cells),
        );
        if let Some(v) = self.visits.get_mut(b) {
            *v = self.steps as i64;
        }
        Ok(())
    }

    fn reapply_bumps(&mut self, deltas: &mut Vec<CellChange>) {
        deltas.retain_mut(|d| {
            if *self.bumps.get(d.cell).unwrap_or(&false) && d.new != PlanCell::Blocked {
                self.plan_grid.set(d.cell, PlanCell::Blocked);
                d.new = PlanCell::Blocked;
            }
            d.old != d.new
        });
    }

    /// Blocks the cells just ahead of a pose that failed to move.
    fn mark_bump(&mut self, pose: Pose) {
        let (fx, fy) = math::forward(pose.theta);
        let reach = self.cfg.agent_radius + self.cfg.map_resolution;
        let p = (pose.x + fx * reach, pose.y + fy * reach);
        let center = self.occupancy.cell_of(p.0, p.1);
        let here = self.occupancy.cell_of(pose.x, pose.y);
        let mut deltas = Vec::new();
        for dr in -1..=1 {
            for dc in -1..=1 {
                let c = center.offset(dc, dr);
                if c == here || !self.occupancy.geometry().contains(c) {
                    continue;
                }
                *self.bumps.get_mut(c).expect("in map") = true;
                if let Some(old) = self.plan_grid.set(c, PlanCell::Blocked) {
                    if old != PlanCell::Blocked {
                        deltas.push(CellChange {
                            cell: c,
                            old,
                            new: PlanCell::Blocked,
                        });
                    }
                }
            }
        }
        self.planner.update_cells(&deltas);
        self.active_target = None;
    }

    fn choose(&mut self, pose: Pose) -> Decision {
        let here = self.occupancy.cell_of(pose.x, pose.y);
        if self.occupancy.explored_count() > self.last_explored {
            self.last_explored = self.occupancy.explored_count();
            self.loops.clear();
        }
        if let Some(goal) = self.goal_estimate() {
            self.mode = Mode::NavigateToGoal;
            if should_call_found(pose, goal, self.occupancy.geometry(), self.cfg.found_distance()) {
                return self.emit(Action::Found, Some(goal));
            }
            if self.spin_left > 0 {
                return self.spin(Some(goal));
            }
            if let Some(action) = self.step_toward(pose, here, goal) {
                return self.guarded(pose, here, action, Some(goal));
            }
            // Unreachable estimate: keep it and explore for a way around.
        } else {
            self.mode = Mode::Explore;
            if self.spin_left > 0 {
                return self.spin(None);
            }
        }
        if let Some(action) = self.explore(pose, here) {
            let target = self.active_target;
            return self.guarded(pose, here, action, target);
        }
        // Nothing left to explore: look around once, then fall back to
        // coverage.
        if !self.exhausted {
            self.exhausted = true;
            self.spin_left = self.spin_len;
            return self.spin(None);
        }
        match self.coverage(pose, here) {
            Some((action, target)) => self.guarded(pose, here, action, Some(target)),
            None => self.emit(Action::TurnLeft, None),
        }
    }

    fn spin(&mut self, target: Option<Cell>) -> Decision {
        self.spin_left = self.spin_left.saturating_sub(1);
        self.emit(Action::TurnLeft, target)
    }

    fn emit(&self, action: Action, target: Option<Cell>) -> Decision {
        Decision {
            action,
            mode: self.mode,
            target,
        }
    }

    /// Passes `action` through the livelock check.
    fn guarded(&mut self, pose: Pose, here: Cell, action: Action, target: Option<Cell>) -> Decision {
        let heading = libm::round(pose.theta / self.turn_angle) as i64;
        let key = (here, heading, self.mode, target);
        let count = self.loops.entry(key).or_insert(0);
        *count += 1;
        if *count > self.cfg.loop_limit {
            self.loops.clear();
            if let (Mode::Explore, Some(t)) = (self.mode, target) {
                self.ban(t);
                self.active_target = None;
                self.coverage_target = None;
            }
            self.spin_left = self.spin_len;
            return self.spin(target);
        }
        self.emit(action, target)
    }

    /// Plans from the agent's cell to `target` and converts the path into an
    /// action. `None` when no path exists.
    fn step_toward(&mut self, pose: Pose, here: Cell, target: Cell) -> Option<Action> {
        let start = if self.plan_grid.is_traversable(here) {
            here
        } else {
            self.plan_grid.nearest_traversable(here, self.inflation + 2)?
        };
        let path = match self.planner.plan(start, target) {
            Ok(p) => p,
            Err(PlanError::NoPath) | Err(PlanError::StartBlocked) => return None,
        };
        let mut cells = path.cells;
        if start != here {
            cells.insert(0, here);
        }
        let lookahead = self.sight_lookahead(&cells);
        let geometry = self.occupancy.geometry();
        let Some(action) = path_to_action(pose, &cells, geometry, lookahead, self.turn_angle) else {
            // Already on the target cell.
            return Some(Action::TurnLeft);
        };
        // A small correction straight after the opposite turn means the path
        // flipped between two views. Go ahead instead of dithering.
        let reversal = matches!(
            (self.last_action, action),
            (Some(Action::TurnLeft), Action::TurnRight) | (Some(Action::TurnRight), Action::TurnLeft)
        );
        let err = waypoint_error(pose, &cells, geometry, lookahead).unwrap_or(0.0);
        if reversal && err.abs() <= self.turn_angle {
            return Some(Action::MoveForward);
        }
        // Keep going straight through small drifts rather than zigzagging
        // between two headings.
        let straight = self.last_action == Some(Action::MoveForward);
        if straight && action != Action::MoveForward && err.abs() <= self.cfg.hold_band * self.turn_angle {
            return Some(Action::MoveForward);
        }
        Some(action)
    }

    /// Farthest path index up to `max_lookahead` reachable in a straight
    /// traversable line from the first cell, but at least `lookahead`.
    fn sight_lookahead(&self, cells: &[Cell]) -> usize {
        let far = self.cfg.max_lookahead.min(cells.len().saturating_sub(1));
        (self.cfg.lookahead + 1..=far)
            .rev()
            .find(|&i| {
                bresenham(cells[0], cells[i])
                    .iter()
                    .skip(1)
                    .all(|&c| self.plan_grid.is_traversable(c))
            })
            .unwrap_or(self.cfg.lookahead)
    }

    /// Whether any frontier cell lies within `radius` cells of `c`.
    fn frontier_near(&self, c: Cell, radius: i32) -> bool {
        (-radius..=radius).any(|dr| (-radius..=radius).any(|dc| is_frontier(self.occupancy.grid(), c.offset(dc, dr))))
    }

    fn blacklisted(&self, c: Cell) -> bool {
        *self.banned.get(c).unwrap_or(&true)
    }

    fn ban(&mut self, c: Cell) {
        let r = (self.cfg.reach_m / self.cfg.map_resolution).ceil() as i32 + 1;
        for dr in -r..=r {
            for dc in -r..=r {
                if let Some(b) = self.banned.get_mut(c.offset(dc, dr)) {
                    *b = true;
                }
            }
        }
    }

    fn explore(&mut self, pose: Pose, here: Cell) -> Option<Action> {
        let geometry = *self.occupancy.geometry();
        self.target_age += 1;
        if let Some(t) = self.active_target {
            let (tx, ty) = geometry.center_of(t);
            let reached = pose.distance_to(tx, ty) <= self.cfg.reach_m;
            let keep = (self.cfg.keep_m / self.cfg.map_resolution).round() as i32;
            let still = self.frontier_near(t, keep);
            if reached && still {
                self.ban(t);
            }
            if reached || !still {
                self.active_target = None;
            }
        }
        if let (Some(t), true) = (self.active_target, self.target_age >= self.cfg.refresh_period) {
            let clusters = self.frontier_candidates();
            self.active_target = self.refreshed_target(here, t, &clusters);
            self.target_age = 0;
        }
        for _ in 0..8 {
            if self.active_target.is_none() {
                let clusters = self.frontier_candidates();
                let field = self.travel_field(here);
                let best = self.best_cluster(here, &field, &clusters)?;
                self.active_target = Some(self.entry_point(here, &field, best).1);
                self.target_age = 0;
            }
            let t = self.active_target.expect("set above");
            if let Some(a) = self.step_toward(pose, here, t) {
                self.exhausted = false;
                self.coverage_target = None;
                return Some(a);
            }
            self.ban(t);
            self.active_target = None;
        }
        None
    }

    /// Frontier clusters with banned cells removed.
    fn frontier_candidates(&self) -> Vec<FrontierCluster> {
        find_frontiers(&self.occupancy)
            .into_iter()
            .filter_map(|mut c| {
                c.cells.retain(|m| !self.blacklisted(*m));
                c.size = c.cells.len();
                (c.size > 0).then_some(c)
            })
            .collect()
    }

    /// Coarse travel distances in meters from `here`, one value per
    /// `FIELD_BLOCK`-cell square.
    fn travel_field(&self, here: Cell) -> Field {
        let b = FIELD_BLOCK;
        let n = (self.cfg.map_size as i32 + b - 1) / b;
        let mut cost = Grid2::new(n as usize, n as usize, f64::INFINITY);
        let mut unexplored = Grid2::new(n as usize, n as usize, 0u32);
        for (c, v) in self.occupancy.grid().iter_cells() {
            if *v == CellState::Unexplored {
                *unexplored
                    .get_mut(Cell::new(c.col / b, c.row / b))
                    .expect("block in range") += 1;
            }
        }
        for (c, v) in self.plan_grid.cells().iter_cells() {
            let m = match v {
                PlanCell::Free => 1.0,
                PlanCell::Unexplored => self.cfg.unexplored_penalty,
                PlanCell::Blocked => continue,
            };
            let k = cost.get_mut(Cell::new(c.col / b, c.row / b)).expect("block in range");
            *k = f64::min(*k, m);
        }
        let mut dist = Grid2::new(n as usize, n as usize, f64::INFINITY);
        let start = Cell::new(here.col.div_euclid(b), here.row.div_euclid(b));
        let Some(d0) = dist.get_mut(start) else {
            return Field { dist, unexplored };
        };
        *d0 = 0.0;
        let step = b as f64 * self.cfg.map_resolution;
        let mut heap = BinaryHeap::new();
        heap.push(HeapEntry {
            dist: 0.0,
            index: dist.index(start),
        });
        while let Some(HeapEntry { dist: d, index: i }) = heap.pop() {
            if d > *dist.at(i) {
                continue;
            }
            let c = dist.cell(i);
            for (dc, dr) in NEIGHBORS8 {
                let nb = c.offset(dc, dr);
                let Some(&m) = cost.get(nb) else { continue };
                if !m.is_finite() {
                    continue;
                }
                let base = if dc != 0 && dr != 0 {
                    std::f64::consts::SQRT_2
                } else {
                    1.0
                };
                let nd = d + step * base * m;
                let j = dist.index(nb);
                if nd < *dist.at(j) {
                    *dist.at_mut(j) = nd;
                    heap.push(HeapEntry { dist: nd, index: j });
                }
            }
        }
        Field { dist, unexplored }
    }

    /// Unexplored cells in the reachable blocks around `c`.
    fn gain(&self, field: &Field, c: Cell) -> f64 {
        let r = (self.cfg.gain_radius_m / (FIELD_BLOCK as f64 * self.cfg.map_resolution)).round() as i32;
        let center = Cell::new(c.col / FIELD_BLOCK, c.row / FIELD_BLOCK);
        let mut total = 0u64;
        for dr in -r..=r {
            for dc in -r..=r {
                let b = center.offset(dc, dr);
                if dr * dr + dc * dc <= r * r && field.dist.value(b).is_some_and(f64::is_finite) {
                    total += field.unexplored.value(b).unwrap_or(0) as u64;
                }
            }
        }
        total as f64
    }

    /// Member of `cluster` with the shortest travel distance, then nearest
    /// in a straight line; ties go to the first in row-major order.
    fn entry_point(&self, here: Cell, field: &Field, cluster: &FrontierCluster) -> (f64, Cell) {
        let mut best = (f64::INFINITY, f64::INFINITY, cluster.representative);
        for &m in &cluster.cells {
            let d = field
                .dist
                .value(Cell::new(m.col / FIELD_BLOCK, m.row / FIELD_BLOCK))
                .unwrap_or(f64::INFINITY);
            let o = octile(here, m);
            if (d, o) < (best.0, best.1) {
                best = (d, o, m);
            }
        }
        (best.0, best.2)
    }

    fn score(&self, here: Cell, field: &Field, c: &FrontierCluster) -> f64 {
        let d = self.cfg.frontier_decay_m;
        if d > 0.0 {
            let (dist, e) = self.entry_point(here, field, c);
            let worth = if self.cfg.gain_radius_m > 0.0 {
                self.gain(field, e)
            } else {
                c.size as f64
            };
            worth * (-dist / d).exp()
        } else {
            c.size as f64
        }
    }

    fn best_cluster<'a>(
        &self,
        here: Cell,
        field: &Field,
        clusters: &'a [FrontierCluster],
    ) -> Option<&'a FrontierCluster> {
        if self.cfg.frontier_decay_m <= 0.0 {
            let t = select_frontier(clusters)?;
            return clusters.iter().find(|c| c.representative == t);
        }
        let mut best: Option<(f64, &FrontierCluster)> = None;
        for c in clusters {
            let s = self.score(here, field, c);
            if s > 0.0 && best.is_none_or(|(b, _)| s > b) {
                best = Some((s, c));
            }
        }
        best.map(|(_, c)| c)
    }

    /// Periodic re-selection: follow the target's own cluster as it evolves
    /// unless another cluster has become `switch_ratio` times better.
    fn refreshed_target(&self, here: Cell, t: Cell, clusters: &[FrontierCluster]) -> Option<Cell> {
        let field = self.travel_field(here);
        let keep = (self.cfg.keep_m / self.cfg.map_resolution).round() as i32;
        let own = clusters
            .iter()
            .filter(|c| c.cells.iter().any(|m| m.chebyshev(t) <= keep))
            .max_by_key(|c| (c.size, Reverse((c.representative.row, c.representative.col))));
        let best = self.best_cluster(here, &field, clusters);
        match (own, best) {
            (Some(o), Some(b)) if self.score(here, &field, b) < self.cfg.switch_ratio * self.score(here, &field, o) => {
                Some(self.entry_point(here, &field, o).1)
            }
            (_, Some(b)) => Some(self.entry_point(here, &field, b).1),
            _ => None,
        }
    }

    /// Walks toward the least-recently-visited block that has known free
    /// space.
    fn coverage(&mut self, pose: Pose, here: Cell) -> Option<(Action, Cell)> {
        if let Some(t) = self.coverage_target {
            let (tx, ty) = self.occupancy.center_of(t);
            if pose.distance_to(tx, ty) <= self.cfg.coverage_block_m * 0.5 {
                self.coverage_target = None;
            }
        }
        for _ in 0..8 {
            if self.coverage_target.is_none() {
                self.coverage_target = self.pick_coverage_block(here);
            }
            let t = self.coverage_target?;
            if let Some(a) = self.step_toward(pose, here, t) {
                return Some((a, t));
            }
            self.ban(t);
            self.coverage_target = None;
        }
        None
    }

    fn pick_coverage_block(&self, here: Cell) -> Option<Cell> {
        let bc = self.block_cells;
        let mut best: Option<((i64, u64, usize), Cell)> = None;
        for (b, &last) in self.visits.iter_cells() {
            let center = Cell::new(b.col * bc + bc / 2, b.row * bc + bc / 2);
            // Free, traversable cell of the block nearest its center.
            let mut pick: Option<(i64, Cell)> = None;
            for dr in 0..bc {
                for dc in 0..bc {
                    let c = Cell::new(b.col * bc + dc, b.row * bc + dr);
                    if self.occupancy.get(c) != CellState::Free || !self.plan_grid.is_traversable(c) {
                        continue;
                    }
                    let d = c.dist2(center);
                    if pick.is_none_or(|p| d < p.0) {
                        pick = Some((d, c));
                    }
                }
            }
            let Some((_, c)) = pick else { continue };
            if self.blacklisted(c) {
                continue;
            }
            let dist = (octile(here, c) * 1000.0) as u64;
            let key = (last, dist, self.visits.index(b));
            if best.is_none_or(|(k, _)| key < k) {
                best = Some((key, c));
            }
        }
        best.map(|(_, c)| c)
    }
}

const FIELD_BLOCK: i32 = 4;

struct Field {
    dist: Grid2<f64>,
    unexplored: Grid2<u32>,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    index: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// True when the agent is within `found_distance` of the center of `goal`.
pub fn should_call_found(pose: Pose, goal: Cell, geometry: &GridGeometry, found_distance: f64) -> bool {
    let (gx, gy) = geometry.center_of(goal);
    pose.distance_to(gx, gy) <= found_distance
}

/// Action that follows `path` (whose first cell is the agent's). Steers at
/// the first waypoint `lookahead` cells ahead, or the last cell of a shorter
/// path. `None` for a single-cell path (arrival).
pub fn path_to_action(
    pose: Pose,
    path: &[Cell],
    geometry: &GridGeometry,
    lookahead: usize,
    turn_angle: f64,
) -> Option<Action> {
    let err = waypoint_error(pose, path, geometry, lookahead)?;
    Some(if err.abs() <= turn_angle * 0.5 {
        Action::MoveForward
    } else if err > 0.0 {
        Action::TurnLeft
    } else {
        Action::TurnRight
    })
}

/// Signed heading error toward the steering waypoint of `path`.
fn waypoint_error(pose: Pose, path: &[Cell], geometry: &GridGeometry, lookahead: usize) -> Option<f64> {
    if path.len() < 2 {
        return None;
    }
    let wp = path[lookahead.clamp(1, path.len() - 1)];
    let (wx, wy) = geometry.center_of(wp);
    let beta = math::bearing(wx - pose.x, wy - pose.y);
    Some(math::angle_diff(beta, pose.theta))
}
