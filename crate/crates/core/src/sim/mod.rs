//! Deterministic discrete-time simulation of workers, robot, obstacles and battery.
//!
//! Workers never react to the robot, so the crowd is a pure function of the seed and the
//! slot. That keeps crowds identical across planner configurations run with one seed.

mod battery;
mod collect;
mod crowd;
mod log;
mod safety;
mod tasks;
mod world;

pub use battery::{apply_battery, battery_delta, waypoint_density};
pub use collect::collect_training_log;
pub use crowd::{sample_goal, sample_goal_with, Crowd, GoalDecision, GoalStream};
pub use log::{LogRow, TimeSeriesLog};
pub use safety::{classify_proxemics, detect_collision, CollisionTracker, ProxemicZone};
pub use tasks::{build_tasks, stream_seed, TaskSpec};
pub use world::{RobotMode, StepRecord, World};
