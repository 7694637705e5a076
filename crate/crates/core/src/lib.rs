//! Training-free multi-object goal navigation.
//!
//! The crate is split along the navigation pipeline:
//!
//! * [`sim`] is a deterministic raycast grid world that stands in for a
//!   photorealistic simulator: world generation, agent dynamics, an RGB-D
//!   column renderer and ground-truth geodesic distances.
//! * [`mapping`] turns depth observations into an egocentric top-down map,
//!   re-projects it into the world frame and fuses it into a global
//!   occupancy map.
//! * [`localization`] finds palette-colored goal objects in the RGB frame and
//!   accumulates their positions in a per-color goal map.
//! * [`planning`] holds the incremental (D* Lite) planner and frontier
//!   extraction.
//! * [`policy`] decides each action: navigate to a localized goal, or explore.
//! * [`metrics`] computes Success, Progress, SPL and PPL.
//! * [`harness`] drives episodes and suites, writes logs and snapshots, and
//!   replays logs against the simulator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod harness;
pub mod localization;
pub mod mapping;
pub mod math;
pub mod metrics;
pub mod planning;
pub mod policy;
pub mod sim;

pub use error::{Error, Result};
