use crate::env::WaypointGraph;
use crate::sim::{waypoint_density, TimeSeriesLog};
use crate::{Error, Result};

/// Battery change and per-waypoint density, aligned with log rows `1..`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSeries {
    pub l: Vec<f64>,
    /// `d[row][waypoint]`, persons per square metre.
    pub d: Vec<Vec<f64>>,
}

/// `L_t = B_t - B_{t-1}` (the first row is dropped) and `D = count / (pi r^2)` per waypoint.
pub fn derive_series(log: &TimeSeriesLog, graph: &WaypointGraph) -> Result<DerivedSeries> {
    if log.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let radii = log
        .waypoint_ids
        .iter()
        .map(|id| graph.require(id).map(|i| graph.waypoint(i).radius))
        .collect::<Result<Vec<f64>>>()?;
    let l = log.rows.windows(2).map(|w| w[1].b - w[0].b).collect();
    let d = log.rows[1..]
        .iter()
        .map(|r| {
            r.counts
                .iter()
                .zip(&radii)
                .map(|(&c, &rad)| waypoint_density(c as f64, rad))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(DerivedSeries { l, d })
}
