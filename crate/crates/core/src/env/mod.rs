//! The warehouse world: waypoint graph, time-slot schedule and the off-time coverage route.

mod coverage;
pub(crate) mod graph;
mod scenario;

pub use coverage::{coverage_route, CoverageRoute};
pub use graph::{pairwise_distance, Arc, Point, RegionLabel, Waypoint, WaypointGraph};
pub use scenario::{bundled_scenario, bundled_scenario_text, load_scenario, BUNDLED_SCENARIOS, Scenario, ScenarioSchedule, Slot, TaskTemplate};
