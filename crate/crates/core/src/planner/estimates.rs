use serde::{Deserialize, Serialize};

use crate::env::WaypointGraph;
use crate::inference::{do_query, expected_value, CausalInferenceModel, QuerySpec};
use crate::{Error, Result};

/// Predicted cost terms of one directed arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcEstimate {
    pub from: usize,
    pub to: usize,
    /// Arc length, m.
    pub delta: f64,
    /// Expected people density at the arrival waypoint, persons/m^2.
    pub d_hat: f64,
    /// Expected battery change per second at the query velocity, %/s.
    pub l_hat: f64,
    /// Battery spent on the arc, % (`delta / v * |l_hat|`).
    pub battery_cost: f64,
}

/// Query results for one (slot, charging, velocity) context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    /// Indexed by graph waypoint.
    pub d_hat: Vec<f64>,
    pub l_hat: f64,
    pub velocity: f64,
}

impl Estimates {
    /// Estimates with no density and a fixed drain; handy for tests and for metric-only use.
    pub fn flat(graph: &WaypointGraph, d_hat: f64, l_hat: f64, velocity: f64) -> Self {
        Estimates {
            d_hat: vec![d_hat; graph.len()],
            l_hat,
            velocity,
        }
    }

    pub fn battery_cost(&self, delta: f64) -> f64 {
        delta / self.velocity * self.l_hat.abs()
    }

    pub fn arc(&self, graph: &WaypointGraph, from: usize, to: usize) -> ArcEstimate {
        let delta = graph
            .arc_length(from, to)
            .unwrap_or_else(|| graph.position(from).distance(graph.position(to)));
        ArcEstimate {
            from,
            to,
            delta,
            d_hat: self.d_hat[to],
            l_hat: self.l_hat,
            battery_cost: self.battery_cost(delta),
        }
    }
}

/// `D(w) = E[D | do(S = slot), W = w]` for every waypoint and
/// `L = E[L | do(V = v), C = charging]` per second.
pub fn estimate_arcs(
    graph: &WaypointGraph,
    model: &CausalInferenceModel,
    slot: &str,
    charging: bool,
    v: f64,
) -> Result<Estimates> {
    let vs = model.schema.get("V")?;
    if !(v > 0.0) || v < vs.lo || v > vs.hi {
        return Err(Error::OutOfRange {
            var: "V".into(),
            value: v,
            lo: vs.lo,
            hi: vs.hi,
        });
    }
    let s = model.code("S", slot)?;
    let d_hat = graph
        .waypoints()
        .iter()
        .map(|wp| {
            let w = model.code("W", &wp.id)?;
            let dist = do_query(model, &QuerySpec::new("D").intervene("S", s).given("W", w))?;
            expected_value(&dist, &model.schema, "D")
        })
        .collect::<Result<Vec<f64>>>()?;
    let c = model.code("C", if charging { "1" } else { "0" })?;
    let dist = do_query(model, &QuerySpec::new("L").intervene("V", vs.lookup(v)).given("C", c))?;
    let l_hat = expected_value(&dist, &model.schema, "L")? / model.period;
    Ok(Estimates {
        d_hat,
        l_hat,
        velocity: v,
    })
}
