//! Cost-aware A* over the waypoint graph and the battery-threshold task decision.

mod astar;
mod decision;
mod estimates;

pub use astar::{plan_path, HeuristicWeights, PathPlan};
pub use decision::{decide_task, Decision, DecisionPolicy};
pub use estimates::{estimate_arcs, ArcEstimate, Estimates};
