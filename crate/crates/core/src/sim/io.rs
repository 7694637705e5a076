//! World and episode files.
//!
//! A world file is a short `key value` header followed by an ASCII grid,
//! top row (largest `y`) first:
//!
//! ```text
//! goalnav-world 1
//! width 6
//! height 4
//! resolution 0.1
//! cylinder_radius 0.2
//! cylinder_height 1
//! agent_height 1.5
//! agent_radius 0.1
//! grid
//! ######
//! #..0.#
//! #....#
//! ######
//! ```
//!
//! `#` is wall, `.` free, `0`-`7` a cylinder cell of that palette index.
//! Floats are written in shortest round-trip form, so `parse(save(w)) == w`.
//!
//! An episode is a world file plus a TOML sidecar naming it and carrying the
//! seed, start pose, goal order, palette, limits and action magnitudes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, Grid2};

use super::world::{Terrain, WorldGrid};
use super::{EpisodeSpec, Pose, Rgb, SimParams};

const MAGIC: &str = "goalnav-world 1";

pub fn world_to_string(world: &WorldGrid) -> String {
    let mut s = String::with_capacity(world.width() * world.height() + world.height() + 256);
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "width {}", world.width());
    let _ = writeln!(s, "height {}", world.height());
    let _ = writeln!(s, "resolution {}", world.resolution());
    let _ = writeln!(s, "cylinder_radius {}", world.cylinder_radius());
    let _ = writeln!(s, "cylinder_height {}", world.cylinder_height());
    let _ = writeln!(s, "agent_height {}", world.agent_height());
    let _ = writeln!(s, "agent_radius {}", world.agent_radius());
    s.push_str("grid\n");
    for row in (0..world.height() as i32).rev() {
        for col in 0..world.width() as i32 {
            s.push(match world.terrain(Cell::new(col, row)) {
                Terrain::Free => '.',
                Terrain::Wall => '#',
                Terrain::Cylinder(c) => (b'0' + c) as char,
            });
        }
        s.push('\n');
    }
    s
}

pub fn world_from_str(text: &str) -> Result<WorldGrid> {
    let err = |m: String| Error::parse("world file", m);
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(err(format!("missing '{MAGIC}' header")));
    }
    let mut width = None;
    let mut height = None;
    let mut resolution = None;
    let mut cyl_r = None;
    let mut cyl_h = None;
    let mut agent_h = None;
    let mut agent_r = None;
    for line in lines.by_ref() {
        let line = line.trim();
        if line == "grid" {
            break;
        }
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| err(format!("malformed header line '{line}'")))?;
        let float = || value.trim().parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
        let int = || value.trim().parse::<usize>().map_err(|e| err(format!("{key}: {e}")));
        match key {
            "width" => width = Some(int()?),
            "height" => height = Some(int()?),
            "resolution" => resolution = Some(float()?),
            "cylinder_radius" => cyl_r = Some(float()?),
            "cylinder_height" => cyl_h = Some(float()?),
            "agent_height" => agent_h = Some(float()?),
            "agent_radius" => agent_r = Some(float()?),
            _ => return Err(err(format!("unknown header key '{key}'"))),
        }
    }
    let need = |v: Option<usize>, k: &str| v.ok_or_else(|| err(format!("missing {k}")));
    let needf = |v: Option<f64>, k: &str| v.ok_or_else(|| err(format!("missing {k}")));
    let (w, h) = (need(width, "width")?, need(height, "height")?);
    let mut cells = Grid2::new(w, h, Terrain::Free);
    let rows: Vec<&str> = lines.collect();
    if rows.len() != h {
        return Err(err(format!("expected {h} grid rows, found {}", rows.len())));
    }
    for (i, line) in rows.iter().enumerate() {
        let row = (h - 1 - i) as i32;
        let bytes = line.as_bytes();
        if bytes.len() != w {
            return Err(err(format!("grid row {i} has {} cells, expected {w}", bytes.len())));
        }
        for (col, &b) in bytes.iter().enumerate() {
            let t = match b {
                b'.' => Terrain::Free,
                b'#' => Terrain::Wall,
                b'0'..=b'7' => Terrain::Cylinder(b - b'0'),
                _ => return Err(err(format!("bad cell '{}' at row {i}", b as char))),
            };
            *cells.get_mut(Cell::new(col as i32, row)).expect("in range") = t;
        }
    }
    WorldGrid::from_cells(
        cells,
        needf(resolution, "resolution")?,
        needf(cyl_r, "cylinder_radius")?,
        needf(cyl_h, "cylinder_height")?,
        needf(agent_h, "agent_height")?,
        needf(agent_r, "agent_radius")?,
    )
}

pub fn write_world(path: &Path, world: &WorldGrid) -> Result<()> {
    std::fs::write(path, world_to_string(world)).map_err(|e| Error::io(path, e))
}

pub fn read_world(path: &Path) -> Result<WorldGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    world_from_str(&text)
}

/// TOML sidecar of an episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeFile {
    pub seed: u64,
    /// World file path, relative to the sidecar's directory.
    pub world: String,
    pub max_steps: usize,
    pub success_radius: f64,
    pub goal_sequence: Vec<u8>,
    pub palette: Vec<Rgb>,
    pub start: Pose,
    pub sim: SimParams,
}

/// Writes `<dir>/<stem>.world` and `<dir>/<stem>.episode.toml`; returns the
/// sidecar path.
pub fn save_episode(spec: &EpisodeSpec, dir: &Path, stem: &str) -> Result<PathBuf> {
    let world_name = format!("{stem}.world");
    write_world(&dir.join(&world_name), &spec.world)?;
    let file = EpisodeFile {
        seed: spec.seed,
        world: world_name,
        max_steps: spec.max_steps,
        success_radius: spec.success_radius,
        goal_sequence: spec.goal_sequence.clone(),
        palette: spec.palette.clone(),
        start: spec.start,
        sim: spec.sim,
    };
    let text = toml::to_string(&file).map_err(|e| Error::parse("episode file", e))?;
    let path = dir.join(format!("{stem}.episode.toml"));
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn load_episode(sidecar: &Path) -> Result<EpisodeSpec> {
    let text = std::fs::read_to_string(sidecar).map_err(|e| Error::io(sidecar, e))?;
    let file: EpisodeFile = toml::from_str(&text).map_err(|e| Error::parse("episode file", e))?;
    let world_path = sidecar.parent().unwrap_or_else(|| Path::new(".")).join(&file.world);
    let world = read_world(&world_path)?;
    let spec = EpisodeSpec {
        seed: file.seed,
        world,
        start: file.start,
        goal_sequence: file.goal_sequence,
        palette: file.palette,
        max_steps: file.max_steps,
        success_radius: file.success_radius,
        sim: file.sim,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_episode, GenerationParams};

    #[test]
    fn world_text_roundtrip() {
        let mut w = WorldGrid::new(12, 9, 0.1).unwrap();
        w.set(Cell::new(4, 4), Terrain::Wall).unwrap();
        w.place_cylinder(Cell::new(7, 4), 5).unwrap();
        let text = world_to_string(&w);
        let back = world_from_str(&text).unwrap();
        assert_eq!(back, w);
        assert_eq!(world_to_string(&back), text);
    }

    #[test]
    fn rejects_open_border_and_bad_cells() {
        let w = WorldGrid::new(5, 5, 0.1).unwrap();
        let text = world_to_string(&w);
        let open = text.replacen("#####\n#...#", "#####\n....#", 1);
        assert!(world_from_str(&open).is_err());
        let bad = text.replacen("#...#", "#.x.#", 1);
        assert!(world_from_str(&bad).is_err());
        let extra = text.replacen("resolution", "colour 3\nresolution", 1);
        assert!(world_from_str(&extra).is_err());
    }

    #[test]
    fn episode_roundtrip_through_files() {
        let params = GenerationParams {
            width_m: 12.0,
            height_m: 12.0,
            min_room_m: 3.0,
            min_sep_m: 2.0,
            ..Default::default()
        };
        let spec = generate_episode(11, &params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let sidecar = save_episode(&spec, dir.path(), "ep").unwrap();
        let back = load_episode(&sidecar).unwrap();
        assert_eq!(back, spec);
    }
}
