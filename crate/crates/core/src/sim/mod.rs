//! Deterministic ground-truth environment.
//!
//! A [`WorldGrid`] holds walls and colored goal cylinders. [`Simulator`]
//! applies the four discrete actions, renders an RGB-D [`Observation`] after
//! every step and adjudicates `Found` calls against ground truth.

mod generate;
mod geodesic;
pub mod io;
mod render;
mod state;
mod world;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate_episode, GenerationParams};
pub use geodesic::{geodesic_distance, geodesic_field, goal_point, Geodesic};
pub use io::{load_episode, save_episode};
pub use render::{cast_ray, render, RayHit, Surface, CEILING_RGB, FLOOR_RGB, WALL_RGB_X, WALL_RGB_Y};
pub use state::{EpisodeStatus, Simulator, StepOutcome};
pub use world::{
    Cylinder, Terrain, WorldGrid, DEFAULT_AGENT_HEIGHT, DEFAULT_AGENT_RADIUS, DEFAULT_CYLINDER_HEIGHT,
    DEFAULT_CYLINDER_RADIUS,
};

/// An RGB color with channels in `[0, 1]`.
pub type Rgb = [f64; 3];

/// Goal colors in index order: red, green, blue, cyan, magenta, yellow,
/// black, white.
pub const DEFAULT_PALETTE: [Rgb; 8] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 1.0, 1.0],
    [1.0, 0.0, 1.0],
    [1.0, 1.0, 0.0],
    [0.0, 0.0, 0.0],
    [1.0, 1.0, 1.0],
];

pub const PALETTE_NAMES: [&str; 8] = ["red", "green", "blue", "cyan", "magenta", "yellow", "black", "white"];

/// Agent pose in the world frame. `theta` is in `[0, 2π)`, 0 faces +y and
/// positive rotation is counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: crate::math::normalize_angle(theta),
        }
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        crate::math::hypot(self.x - x, self.y - y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    MoveForward,
    TurnLeft,
    TurnRight,
    Found,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::MoveForward, Action::TurnLeft, Action::TurnRight, Action::Found];
}

/// Pinhole parameters of the column renderer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub width: usize,
    pub height: usize,
    /// Horizontal field of view, radians.
    pub hfov: f64,
    /// Sensor range, meters.
    pub max_range: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            width: 128,
            height: 64,
            hfov: 79f64.to_radians(),
            max_range: 5.0,
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width < 3 || self.height < 3 {
            return Err(Error::InvalidInput(format!(
                "camera must be at least 3x3 pixels, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.hfov > 0.0 && self.hfov < std::f64::consts::PI) {
            return Err(Error::InvalidInput(format!(
                "hfov must lie in (0, pi), got {}",
                self.hfov
            )));
        }
        if !(self.max_range > 0.0) || !self.max_range.is_finite() {
            return Err(Error::InvalidInput(format!(
                "max_range must be positive, got {}",
                self.max_range
            )));
        }
        Ok(())
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        (self.width as f64 / 2.0) / crate::math::tan(self.hfov / 2.0)
    }

    /// Tangent of the angle between column `u`'s ray and the optical axis,
    /// positive to the right. Column `width / 2` lies on the axis.
    pub fn column_tan(&self, u: usize) -> f64 {
        (u as f64 - self.width as f64 / 2.0) / self.focal()
    }
}

/// Action magnitudes and sensor of the simulated agent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    /// Meters advanced by `MoveForward`.
    pub forward_step: f64,
    /// Radians rotated by `TurnLeft` / `TurnRight`.
    pub turn_angle: f64,
    pub camera: CameraConfig,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            forward_step: 0.25,
            turn_angle: 30f64.to_radians(),
            camera: CameraConfig::default(),
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.forward_step > 0.0) {
            return Err(Error::InvalidInput("forward_step must be positive".into()));
        }
        if !(self.turn_angle > 0.0 && self.turn_angle < std::f64::consts::PI) {
            return Err(Error::InvalidInput("turn_angle must lie in (0, pi)".into()));
        }
        self.camera.validate()
    }
}

/// One RGB-D frame plus the noiseless pose reading.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at the top of the image.
    pub rgb: Vec<Rgb>,
    /// Perpendicular depth in meters; `max_range` where nothing was hit.
    pub depth: Vec<f64>,
    pub pose: Pose,
}

impl Observation {
    #[inline]
    pub fn rgb_at(&self, u: usize, v: usize) -> Rgb {
        self.rgb[v * self.width + u]
    }

    #[inline]
    pub fn depth_at(&self, u: usize, v: usize) -> f64 {
        self.depth[v * self.width + u]
    }
}

/// Everything needed to run and score one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeSpec {
    pub seed: u64,
    pub world: WorldGrid,
    pub start: Pose,
    /// Ordered, distinct color ids to find.
    pub goal_sequence: Vec<u8>,
    pub palette: Vec<Rgb>,
    pub max_steps: usize,
    pub success_radius: f64,
    pub sim: SimParams,
}

impl EpisodeSpec {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.goal_sequence.is_empty() {
            return Err(Error::InvalidInput("goal sequence is empty".into()));
        }
        let mut seen = [false; 256];
        for &g in &self.goal_sequence {
            if seen[g as usize] {
                return Err(Error::InvalidInput(format!("goal color {g} repeats")));
            }
            seen[g as usize] = true;
            if g as usize >= self.palette.len() {
                return Err(Error::InvalidInput(format!(
                    "goal color {g} outside palette of {}",
                    self.palette.len()
                )));
            }
            if self.world.cylinder(g).is_none() {
                return Err(Error::InvalidInput(format!(
                    "goal color {g} has no cylinder in the world"
                )));
            }
        }
        if !(self.success_radius > 0.0) {
            return Err(Error::InvalidInput("success_radius must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be positive".into()));
        }
        Ok(())
    }
}
