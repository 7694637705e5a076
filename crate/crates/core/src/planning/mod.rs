//! Incremental grid planning and frontier extraction.

mod dstar;
mod frontier;
mod plan_grid;

pub use dstar::{dijkstra_cost, Path, PlanError, Planner};
pub use frontier::{find_frontiers, find_frontiers_in, is_frontier, select_frontier, FrontierCluster};
pub use plan_grid::{CellChange, PlanCell, PlanGrid, PlanParams};
