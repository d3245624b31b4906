use crate::params::BatteryParams;
use crate::{Error, Result};

/// Battery change over one step of `params.dt` seconds, in percent.
///
/// Charging dominates: with `charging` set the obstacle flag is ignored.
pub fn battery_delta(v: f64, charging: bool, obstacle: bool, params: &BatteryParams) -> f64 {
    if charging {
        return params.dt * params.k_c;
    }
    let drain = params.dt * (params.k_s + params.k_d * v.max(0.0));
    if obstacle {
        -drain * params.k_o
    } else {
        -drain
    }
}

/// Next battery level, saturating at 0 and 100 %.
pub fn apply_battery(b_prev: f64, l: f64) -> f64 {
    (b_prev + l).clamp(0.0, 100.0)
}

/// People per square metre inside a waypoint's circular area.
pub fn waypoint_density(count: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
    }
    Ok(count / (std::f64::consts::PI * radius * radius))
}
