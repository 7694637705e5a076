//! Column raycaster producing an RGB-D frame.
//!
//! Each image column casts one ray. Walls are found by a grid DDA, cylinders
//! by exact ray/circle intersection. The nearest hit fills a vertical band
//! centered on the horizon whose height shrinks with distance; rows above and
//! below show ceiling and floor at `max_range` depth.

use crate::error::{Error, Result};
use crate::grid::Cell;
use crate::math;

use super::world::{Cylinder, Terrain, WorldGrid};
use super::{CameraConfig, Observation, Pose, Rgb};

/// Shade of wall faces perpendicular to the x axis.
pub const WALL_RGB_X: Rgb = [0.75, 0.6, 0.45];
/// Shade of wall faces perpendicular to the y axis.
pub const WALL_RGB_Y: Rgb = [0.6, 0.48, 0.36];
pub const FLOOR_RGB: Rgb = [0.55, 0.55, 0.55];
pub const CEILING_RGB: Rgb = [0.4, 0.4, 0.4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Surface {
    /// `x_face` is true when the ray crossed a vertical (constant-x) cell
    /// boundary to enter the wall.
    Wall {
        cell: Cell,
        x_face: bool,
    },
    Cylinder(u8),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    /// Distance along the ray, meters.
    pub range: f64,
    pub surface: Surface,
}

/// Nearest surface along the unit direction `dir` from `(x, y)` within
/// `max_range`.
pub fn cast_ray(
    world: &WorldGrid,
    cylinders: &[Cylinder],
    origin: (f64, f64),
    dir: (f64, f64),
    max_range: f64,
) -> Result<Option<RayHit>> {
    let wall = cast_walls(world, origin, dir, max_range);
    let mut best = wall;
    for cyl in cylinders {
        if let Some(t) = ray_circle(origin, dir, cyl.center, cyl.radius)? {
            if t <= max_range && best.is_none_or(|b| t < b.range) {
                best = Some(RayHit {
                    range: t,
                    surface: Surface::Cylinder(cyl.color),
                });
            }
        }
    }
    Ok(best)
}

/// Amanatides-Woo traversal in cell units.
fn cast_walls(world: &WorldGrid, origin: (f64, f64), dir: (f64, f64), max_range: f64) -> Option<RayHit> {
    let res = world.resolution();
    let (ox, oy) = (origin.0 / res, origin.1 / res);
    let mut cell = Cell::new(ox.floor() as i32, oy.floor() as i32);
    let step_x = if dir.0 > 0.0 { 1 } else { -1 };
    let step_y = if dir.1 > 0.0 { 1 } else { -1 };
    let t_delta_x = if dir.0 != 0.0 {
        (1.0 / dir.0).abs()
    } else {
        f64::INFINITY
    };
    let t_delta_y = if dir.1 != 0.0 {
        (1.0 / dir.1).abs()
    } else {
        f64::INFINITY
    };
    let mut t_max_x = if dir.0 > 0.0 {
        (cell.col as f64 + 1.0 - ox) * t_delta_x
    } else if dir.0 < 0.0 {
        (ox - cell.col as f64) * t_delta_x
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dir.1 > 0.0 {
        (cell.row as f64 + 1.0 - oy) * t_delta_y
    } else if dir.1 < 0.0 {
        (oy - cell.row as f64) * t_delta_y
    } else {
        f64::INFINITY
    };
    let limit = max_range / res;
    loop {
        let (t_enter, x_face) = if t_max_x < t_max_y {
            let t = t_max_x;
            cell.col += step_x;
            t_max_x += t_delta_x;
            (t, true)
        } else {
            let t = t_max_y;
            cell.row += step_y;
            t_max_y += t_delta_y;
            (t, false)
        };
        if t_enter > limit {
            return None;
        }
        if world.terrain(cell) == Terrain::Wall {
            return Some(RayHit {
                range: t_enter * res,
                surface: Surface::Wall { cell, x_face },
            });
        }
    }
}

/// Smallest non-negative `t` with `|o + t d - c| = r`. Errors when the origin
/// lies inside the circle.
fn ray_circle(o: (f64, f64), d: (f64, f64), c: (f64, f64), r: f64) -> Result<Option<f64>> {
    let oc = (o.0 - c.0, o.1 - c.1);
    let b = oc.0 * d.0 + oc.1 * d.1;
    let cc = oc.0 * oc.0 + oc.1 * oc.1 - r * r;
    if cc < 0.0 {
        return Err(Error::InvalidInput("camera is inside a cylinder".into()));
    }
    let disc = b * b - cc;
    if disc < 0.0 {
        return Ok(None);
    }
    let t = -b - disc.sqrt();
    Ok(if t >= 0.0 { Some(t) } else { None })
}

pub fn render(world: &WorldGrid, pose: Pose, cam: &CameraConfig) -> Result<Observation> {
    cam.validate()?;
    let here = world.cell_of(pose.x, pose.y);
    if world.terrain(here) != Terrain::Free {
        return Err(Error::InvalidInput(format!(
            "cannot render from ({}, {}): cell {here} is not free",
            pose.x, pose.y
        )));
    }
    let cylinders = world.cylinders();
    let (w, h) = (cam.width, cam.height);
    let f = cam.focal();
    let mut rgb = vec![[0.0; 3]; w * h];
    let mut depth = vec![cam.max_range; w * h];
    for v in 0..h {
        let shade = if v < h / 2 { CEILING_RGB } else { FLOOR_RGB };
        for u in 0..w {
            rgb[v * w + u] = shade;
        }
    }
    for u in 0..w {
        let lateral = cam.column_tan(u);
        let norm = math::hypot(lateral, 1.0);
        let dir = math::ego_to_world(pose.theta, lateral / norm, 1.0 / norm);
        let Some(hit) = cast_ray(world, &cylinders, (pose.x, pose.y), dir, cam.max_range)? else {
            continue;
        };
        // Perpendicular (z-buffer) depth.
        let z = hit.range / norm;
        if !(z > 0.0) {
            continue;
        }
        let color = match hit.surface {
            Surface::Wall { x_face: true, .. } => WALL_RGB_X,
            Surface::Wall { x_face: false, .. } => WALL_RGB_Y,
            Surface::Cylinder(id) => super::DEFAULT_PALETTE[id as usize],
        };
        let band = ((f * world.cylinder_height() / z).round() as usize).clamp(1, h);
        let top = (h - band) / 2;
        for v in top..top + band {
            rgb[v * w + u] = color;
            depth[v * w + u] = z.min(cam.max_range);
        }
    }
    Ok(Observation {
        width: w,
        height: h,
        rgb,
        depth,
        pose,
    })
}
