//! Palette-color goal detection and the per-color goal map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, Grid2, GridGeometry, NEIGHBORS8};
use crate::math;
use crate::sim::{CameraConfig, Observation, Pose, Rgb, DEFAULT_PALETTE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    /// A pixel matches color `c` when `|rgb - c| < epsilon` (Euclidean, RGB
    /// in [0, 1]).
    pub epsilon: f64,
    /// Connected components with fewer pixels are discarded.
    pub delta: usize,
    pub palette: Vec<Rgb>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            epsilon: 0.001,
            delta: 50,
            palette: DEFAULT_PALETTE.to_vec(),
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        if self.delta < 1 {
            return Err(Error::InvalidInput("delta must be at least 1".into()));
        }
        for (i, a) in self.palette.iter().enumerate() {
            for b in &self.palette[i + 1..] {
                if color_distance(*a, *b) <= 2.0 * self.epsilon {
                    return Err(Error::InvalidInput(
                        "palette colors must be more than 2*epsilon apart".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[inline]
pub fn color_distance(a: Rgb, b: Rgb) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Image-sized binary mask, row 0 at the top.
pub type PixelMask = Grid2<bool>;

/// One mask per palette color, every color scanned regardless of which goal
/// is current.
pub fn detect_goals(obs: &Observation, cfg: &DetectorConfig) -> Vec<PixelMask> {
    let mut masks: Vec<PixelMask> = cfg
        .palette
        .iter()
        .map(|_| Grid2::new(obs.width, obs.height, false))
        .collect();
    for (i, px) in obs.rgb.iter().enumerate() {
        for (k, c) in cfg.palette.iter().enumerate() {
            if color_distance(*px, *c) < cfg.epsilon {
                *masks[k].at_mut(i) = true;
            }
        }
    }
    masks
}

/// Zeroes every 8-connected component with fewer than `delta` pixels.
pub fn filter_components(mask: &PixelMask, delta: usize) -> PixelMask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = Grid2::new(w, h, false);
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut component = Vec::new();
    for start in 0..w * h {
        if !*mask.at(start) || seen[start] {
            continue;
        }
        component.clear();
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            component.push(i);
            let c = mask.cell(i);
            for (dc, dr) in NEIGHBORS8 {
                let n = c.offset(dc, dr);
                if mask.value(n) == Some(true) {
                    let j = mask.index(n);
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        if component.len() >= delta {
            for &i in &component {
                *out.at_mut(i) = true;
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct ChannelTally {
    count: i64,
    sum_col: i64,
    sum_row: i64,
}

/// `n` binary channels sharing the occupancy map's geometry. Cells are only
/// ever added.
#[derive(Clone, Debug, PartialEq)]
pub struct GoalMap {
    geometry: GridGeometry,
    channels: Vec<Grid2<bool>>,
    tallies: Vec<ChannelTally>,
}

impl GoalMap {
    pub fn new(geometry: GridGeometry, channels: usize) -> Self {
        GoalMap {
            geometry,
            channels: (0..channels)
                .map(|_| Grid2::new(geometry.width, geometry.height, false))
                .collect(),
            tallies: vec![ChannelTally::default(); channels],
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn get(&self, color: usize, c: Cell) -> bool {
        self.channels.get(color).and_then(|ch| ch.value(c)).unwrap_or(false)
    }

    /// Sets a cell; returns whether it was newly set.
    pub fn set(&mut self, color: usize, c: Cell) -> bool {
        let Some(ch) = self.channels.get_mut(color) else {
            return false;
        };
        match ch.get_mut(c) {
            Some(v) if !*v => {
                *v = true;
                let t = &mut self.tallies[color];
                t.count += 1;
                t.sum_col += c.col as i64;
                t.sum_row += c.row as i64;
                true
            }
            _ => false,
        }
    }

    pub fn count(&self, color: usize) -> usize {
        self.tallies.get(color).map_or(0, |t| t.count as usize)
    }

    pub fn cells(&self, color: usize) -> Vec<Cell> {
        self.channels.get(color).map_or_else(Vec::new, |ch| {
            ch.iter_cells().filter(|(_, v)| **v).map(|(c, _)| c).collect()
        })
    }

    /// Binary PPM composite: each set cell takes the palette color of its
    /// lowest channel, empty cells are mid-gray. Top row first.
    pub fn to_ppm(&self, palette: &[Rgb]) -> Vec<u8> {
        let (w, h) = (self.geometry.width, self.geometry.height);
        let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
        out.reserve(w * h * 3);
        for row in (0..h).rev() {
            for col in 0..w {
                let i = row * w + col;
                let px = self
                    .channels
                    .iter()
                    .position(|ch| *ch.at(i))
                    .and_then(|k| palette.get(k))
                    .map(|c| c.map(|v| (v * 255.0).round() as u8))
                    .unwrap_or([128, 128, 128]);
                out.extend_from_slice(&px);
            }
        }
        out
    }
}

/// Back-projects every surviving mask pixel through its column ray and depth
/// into the goal map. Pixels without a range reading are skipped. Returns
/// the number of newly set cells.
pub fn project_goals(
    masks: &[PixelMask],
    obs: &Observation,
    pose: Pose,
    cam: &CameraConfig,
    goal_map: &mut GoalMap,
) -> Result<usize> {
    if masks.len() > goal_map.channel_count() {
        return Err(Error::InvalidInput(format!(
            "{} masks for a goal map with {} channels",
            masks.len(),
            goal_map.channel_count()
        )));
    }
    let (c, s) = (math::cos(pose.theta), math::sin(pose.theta));
    let geometry = *goal_map.geometry();
    let mut added = 0;
    for (color, mask) in masks.iter().enumerate() {
        for v in 0..mask.height() {
            for u in 0..mask.width() {
                if !*mask.at(v * mask.width() + u) {
                    continue;
                }
                let z = obs.depth_at(u, v);
                if !(z < cam.max_range) {
                    continue;
                }
                let (r, f) = (z * cam.column_tan(u), z);
                let x = pose.x + r * c - f * s;
                let y = pose.y + r * s + f * c;
                let cell = geometry.cell_of(x, y);
                if geometry.contains(cell) && goal_map.set(color, cell) {
                    added += 1;
                }
            }
        }
    }
    Ok(added)
}

/// Rounded mean cell of a channel (halves round up), `None` when empty.
pub fn estimate_goal_position(goal_map: &GoalMap, color: usize) -> Option<Cell> {
    let t = goal_map.tallies.get(color)?;
    if t.count == 0 {
        return None;
    }
    let round = |sum: i64| (2 * sum + t.count).div_euclid(2 * t.count) as i32;
    Some(Cell::new(round(t.sum_col), round(t.sum_row)))
}

/// Detection, component filtering and projection for one frame.
pub fn localize(obs: &Observation, cam: &CameraConfig, cfg: &DetectorConfig, goal_map: &mut GoalMap) -> Result<usize> {
    let masks: Vec<PixelMask> = detect_goals(obs, cfg)
        .iter()
        .map(|m| filter_components(m, cfg.delta))
        .collect();
    project_goals(&masks, obs, obs.pose, cam, goal_map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs_of(rgb: Vec<Rgb>, w: usize, h: usize) -> Observation {
        Observation {
            width: w,
            height: h,
            depth: vec![1.0; w * h],
            rgb,
            pose: Pose::new(0.0, 0.0, 0.0),
        }
    }

    #[test]
    fn floor_gray_matches_nothing() {
        let cfg = DetectorConfig::default();
        let obs = obs_of(vec![crate::sim::FLOOR_RGB; 12], 4, 3);
        assert!(detect_goals(&obs, &cfg).iter().all(|m| m.as_slice().iter().all(|b| !b)));
    }

    #[test]
    fn exact_color_and_strict_threshold() {
        let cfg = DetectorConfig::default();
        let mut rgb = vec![[0.5; 3]; 3];
        rgb[0] = [1.0, 0.0, 0.0];
        // Exactly epsilon away from red along the green axis.
        rgb[1] = [1.0, cfg.epsilon, 0.0];
        rgb[2] = [1.0, cfg.epsilon * 0.5, 0.0];
        let masks = detect_goals(&obs_of(rgb, 3, 1), &cfg);
        assert_eq!(masks[0].as_slice(), &[true, false, true]);
        assert!(masks[1..].iter().all(|m| m.as_slice().iter().all(|b| !b)));
    }

    fn blob(w: usize, h: usize, cells: impl IntoIterator<Item = (i32, i32)>) -> PixelMask {
        let mut m = Grid2::new(w, h, false);
        for (c, r) in cells {
            *m.get_mut(Cell::new(c, r)).unwrap() = true;
        }
        m
    }

    #[test]
    fn component_size_boundary() {
        let rect = |n: i32| (0..n).map(|i| (i % 10, i / 10));
        let m49 = blob(20, 20, rect(49));
        assert!(filter_components(&m49, 50).as_slice().iter().all(|b| !b));
        let m50 = blob(20, 20, rect(50));
        assert_eq!(filter_components(&m50, 50), m50);
    }

    #[test]
    fn diagonal_pixels_are_connected() {
        let m = blob(5, 5, [(0, 0), (1, 1), (2, 2)]);
        assert_eq!(filter_components(&m, 3), m);
    }

    #[test]
    fn estimate_is_rounded_mean() {
        let g = GridGeometry {
            width: 30,
            height: 30,
            resolution: 0.1,
            origin: (0.0, 0.0),
        };
        let mut gm = GoalMap::new(g, 8);
        assert_eq!(estimate_goal_position(&gm, 0), None);
        gm.set(0, Cell::new(10, 20));
        assert_eq!(estimate_goal_position(&gm, 0), Some(Cell::new(10, 20)));
        gm.set(1, Cell::new(10, 10));
        gm.set(1, Cell::new(12, 14));
        assert_eq!(estimate_goal_position(&gm, 1), Some(Cell::new(11, 12)));
        // Re-setting is a no-op.
        assert!(!gm.set(1, Cell::new(12, 14)));
        assert_eq!(gm.count(1), 2);
    }

    #[test]
    fn empty_masks_leave_map_unchanged() {
        let cam = CameraConfig::default();
        let g = GridGeometry {
            width: 50,
            height: 50,
            resolution: 0.1,
            origin: (-2.5, -2.5),
        };
        let mut gm = GoalMap::new(g, 8);
        let before = gm.clone();
        let obs = Observation {
            width: cam.width,
            height: cam.height,
            rgb: vec![[0.5; 3]; cam.width * cam.height],
            depth: vec![1.0; cam.width * cam.height],
            pose: Pose::new(0.0, 0.0, 0.0),
        };
        let masks: Vec<PixelMask> = (0..8).map(|_| Grid2::new(cam.width, cam.height, false)).collect();
        assert_eq!(project_goals(&masks, &obs, obs.pose, &cam, &mut gm).unwrap(), 0);
        assert_eq!(gm, before);
    }

    #[test]
    fn palette_validation() {
        let mut cfg = DetectorConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.palette.push([1.0, 0.0, 0.0005]);
        assert!(cfg.validate().is_err());
    }
}
