use serde::{Deserialize, Serialize};

use super::astar::PathPlan;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionPolicy {
    /// Minimum battery level that must remain after the task, %.
    pub b_min: f64,
    /// Velocity used for battery queries, m/s.
    pub query_velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Proceed,
    Abort,
}

/// Proceed iff `B_now - C_L >= B_min`; taken once, before the task starts.
pub fn decide_task(plan: &PathPlan, b_now: f64, policy: &DecisionPolicy) -> Decision {
    if b_now - plan.c_l >= policy.b_min {
        Decision::Proceed
    } else {
        Decision::Abort
    }
}
