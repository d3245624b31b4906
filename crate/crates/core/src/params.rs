//! The parameters document: battery constants, robot and crowd kinematics, task rules,
//! planner weights and pipeline settings. Every field has a default.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Battery drain model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatteryParams {
    /// Static drain, %/s.
    pub k_s: f64,
    /// Motion drain coefficient, % per metre.
    pub k_d: f64,
    /// Obstacle multiplier (dimensionless, >= 1).
    pub k_o: f64,
    /// Charging rate, %/s.
    pub k_c: f64,
    /// Simulation step, s.
    pub dt: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        BatteryParams {
            // 100 % over 5 h idle
            k_s: 100.0 / (5.0 * 3600.0),
            k_d: 0.0027,
            k_o: 3.0,
            // full charge in one hour
            k_c: 100.0 / 3600.0,
            dt: 0.1,
        }
    }
}

impl BatteryParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k_s", self.k_s), ("k_d", self.k_d), ("k_c", self.k_c), ("dt", self.dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("battery.{name}"), "must be positive"));
            }
        }
        if !(self.k_o >= 1.0) {
            return Err(Error::invalid("battery.k_o", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotParams {
    /// Maximum (and commanded) speed, m/s.
    pub v_max: f64,
    /// The robot stops while any person is closer than this, m.
    pub stall_radius: f64,
    /// Circumscribed radius of the base; closer persons count as collisions, m.
    pub collision_radius: f64,
    /// Probability that a task's path carries an unexpected obstacle.
    pub obstacle_probability: f64,
    /// Speed factor while manoeuvring around an obstacle.
    pub obstacle_speed_factor: f64,
    /// Length of the manoeuvre zone centred on the obstacle, m.
    pub obstacle_zone: f64,
    /// Travelled distance per metre of progress inside the manoeuvre zone.
    pub obstacle_detour_factor: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        RobotParams {
            v_max: 0.5,
            stall_radius: 0.6,
            collision_radius: 0.3,
            obstacle_probability: 0.25,
            obstacle_speed_factor: 0.5,
            obstacle_zone: 2.0,
            obstacle_detour_factor: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrowdParams {
    /// Nominal walking speed, m/s.
    pub speed: f64,
    /// Dwell time at a reached goal is uniform in `[dwell_min, dwell_max]` seconds.
    pub dwell_min: f64,
    pub dwell_max: f64,
    /// Standard deviation of the per-step positional jitter, m.
    pub noise_sigma: f64,
    /// Walkers keep to the right of the waypoint-to-waypoint line, at a distance drawn
    /// uniformly from `[lane_min, lane_max]` per trip, m.
    pub lane_min: f64,
    pub lane_max: f64,
}

impl Default for CrowdParams {
    fn default() -> Self {
        CrowdParams {
            speed: 1.2,
            dwell_min: 30.0,
            dwell_max: 120.0,
            noise_sigma: 0.01,
            lane_min: 0.35,
            lane_max: 0.55,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskParams {
    /// Task deadline, s.
    pub deadline: f64,
    /// Minimum battery level, %.
    pub b_min: f64,
}

impl Default for TaskParams {
    fn default() -> Self {
        TaskParams {
            deadline: 45.0,
            b_min: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerParams {
    pub lambda_delta: f64,
    pub lambda_d: f64,
    pub lambda_l: f64,
    /// Velocity used in the battery query; defaults to the robot's maximum speed.
    pub query_velocity: Option<f64>,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            lambda_delta: 1.0,
            lambda_d: 10.0,
            lambda_l: 5.0,
            query_velocity: None,
        }
    }
}

/// Settings for the data-collection run and the learning pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearningParams {
    /// Simulated seconds per slot in the data-collection run.
    pub slot_seconds: f64,
    /// Docked charging period at the start of every slot after the first, s.
    pub charge_seconds: f64,
    /// Requested subsampling rate, Hz.
    pub candidate_rate: f64,
    /// Upper bound for the elbow search.
    pub max_bins: usize,
    /// Significance level of the discovery tests.
    pub alpha: f64,
    /// Shuffles per permutation test.
    pub permutations: usize,
    /// Seed of the permutation tests.
    pub discovery_seed: u64,
}

impl Default for LearningParams {
    fn default() -> Self {
        LearningParams {
            slot_seconds: 900.0,
            charge_seconds: 60.0,
            candidate_rate: 2.0,
            max_bins: 6,
            alpha: 0.05,
            permutations: 500,
            discovery_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub battery: BatteryParams,
    pub robot: RobotParams,
    pub crowd: CrowdParams,
    pub task: TaskParams,
    pub planner: PlannerParams,
    pub learning: LearningParams,
}

impl Params {
    pub fn parse(text: &str) -> Result<Params> {
        let p: Params = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("params serialise")
    }

    pub fn validate(&self) -> Result<()> {
        self.battery.validate()?;
        let r = &self.robot;
        if !(r.v_max > 0.0) {
            return Err(Error::invalid("robot.v_max", "must be positive"));
        }
        if !(r.stall_radius > 0.0 && r.collision_radius > 0.0) {
            return Err(Error::invalid("robot", "radii must be positive"));
        }
        if !(0.0..=1.0).contains(&r.obstacle_probability) {
            return Err(Error::invalid("robot.obstacle_probability", "must lie in [0, 1]"));
        }
        if !(r.obstacle_speed_factor > 0.0 && r.obstacle_speed_factor <= 1.0) {
            return Err(Error::invalid("robot.obstacle_speed_factor", "must lie in (0, 1]"));
        }
        if !(r.obstacle_detour_factor >= 1.0) {
            return Err(Error::invalid("robot.obstacle_detour_factor", "must be at least 1"));
        }
        let c = &self.crowd;
        if !(c.speed > 0.0 && c.dwell_min >= 0.0 && c.dwell_max >= c.dwell_min) {
            return Err(Error::invalid("crowd", "speed must be positive and dwell_min <= dwell_max"));
        }
        if !(c.lane_min >= 0.0 && c.lane_max >= c.lane_min) {
            return Err(Error::invalid("crowd", "lanes need 0 <= lane_min <= lane_max"));
        }
        if !(0.0..100.0).contains(&self.task.b_min) {
            return Err(Error::invalid("task.b_min", "must lie in [0, 100)"));
        }
        if !(self.task.deadline > 0.0) {
            return Err(Error::invalid("task.deadline", "must be positive"));
        }
        let l = &self.learning;
        if !(l.alpha > 0.0 && l.alpha < 1.0) {
            return Err(Error::invalid("learning.alpha", "must lie in (0, 1)"));
        }
        if l.max_bins == 0 {
            return Err(Error::invalid("learning.max_bins", "must be positive"));
        }
        Ok(())
    }

    /// Velocity used in the battery query.
    pub fn query_velocity(&self) -> f64 {
        self.planner.query_velocity.unwrap_or(self.robot.v_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_validate() {
        let p = Params::default();
        p.validate().unwrap();
        assert_eq!(Params::parse(&p.to_toml()).unwrap(), p);
    }

    #[test]
    fn partial_document_fills_defaults() {
        let p = Params::parse("[planner]\nlambda_d = 100.0\n").unwrap();
        assert_eq!(p.planner.lambda_d, 100.0);
        assert_eq!(p.planner.lambda_l, 5.0);
        assert!(Params::parse("[planner]\nlambda_q = 1.0\n").is_err());
        assert!(Params::parse("[battery]\nk_o = 0.5\n").is_err());
    }

    #[test]
    fn max_speed_follows_from_the_four_hour_rating() {
        // V_max = (100 / (4 h) - K_s) / K_d
        let b = BatteryParams::default();
        let v = (100.0 / (4.0 * 3600.0) - b.k_s) / b.k_d;
        assert!((v - 0.5).abs() < 0.02, "{v}");
    }
}
