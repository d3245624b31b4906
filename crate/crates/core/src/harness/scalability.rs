use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::WaypointGraph;
use crate::inference::CausalInferenceModel;
use crate::planner::estimate_arcs;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityRow {
    pub size: usize,
    pub repeats: usize,
    /// Mean wall-clock time of one full set of arc queries, s.
    pub mean_s: f64,
    /// Sample standard deviation; absent with a single repeat.
    pub std_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`. `r_squared` is 1 for a perfect fit and for
/// constant `y`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DegenerateTest("a line needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateTest("all x are equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(LinearFit {
        slope,
        intercept,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityReport {
    pub rows: Vec<ScalabilityRow>,
    pub fit: LinearFit,
}

/// Times the full per-waypoint query set on connected subgraphs of increasing size.
///
/// Each size takes the first `size` waypoints in breadth-first order from the charging
/// station. Every repeat draws a slot and a velocity at random.
pub fn scalability_bench(
    graph: &WaypointGraph,
    model: &CausalInferenceModel,
    sizes: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<ScalabilityReport> {
    if sizes.is_empty() || repeats == 0 {
        return Err(Error::invalid("sizes", "need at least one size and one repeat"));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes.iter().any(|&s| s == 0 || s > graph.len()) {
        return Err(Error::invalid(
            "sizes",
            format!("must be ascending and within 1..={}", graph.len()),
        ));
    }
    let slots = model.variable("S")?.labels.clone();
    let vs = model.schema.get("V")?;
    let (v_lo, v_hi) = (vs.lo.max(1e-3), vs.hi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subs = sizes
        .iter()
        .map(|&size| graph.induced_subgraph(&graph.bfs_prefix(graph.charging_station(), size)))
        .collect::<Result<Vec<_>>>()?;
    // sizes are interleaved within each repeat so slow spells of the machine hit all of them
    let mut times = vec![Vec::with_capacity(repeats); sizes.len()];
    for sub in &subs {
        std::hint::black_box(estimate_arcs(sub, model, &slots[0], false, v_hi)?);
    }
    for _ in 0..repeats {
        for (sub, out) in subs.iter().zip(times.iter_mut()) {
            let slot = &slots[rng.random_range(0..slots.len())];
            let v = if v_hi > v_lo { rng.random_range(v_lo..=v_hi) } else { v_hi };
            let t = Instant::now();
            let est = estimate_arcs(sub, model, slot, false, v)?;
            out.push(t.elapsed().as_secs_f64());
            std::hint::black_box(est);
        }
    }
    let rows: Vec<ScalabilityRow> = sizes
        .iter()
        .zip(&times)
        .map(|(&size, times)| {
            let n = times.len() as f64;
            let mean = times.iter().sum::<f64>() / n;
            let std = (repeats > 1).then(|| (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
            ScalabilityRow {
                size,
                repeats,
                mean_s: mean,
                std_s: std,
            }
        })
        .collect();
    let fit = if rows.len() >= 2 {
        let x: Vec<f64> = rows.iter().map(|r| r.size as f64).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.mean_s).collect();
        linear_fit(&x, &y)?
    } else {
        LinearFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            r_squared: f64::NAN,
        }
    };
    Ok(ScalabilityReport { rows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_line_r_squared() {
        // residuals +-1 around y = x on x = 0..3: ss_res = 4 - fitted adjustment
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 0.0, 3.0, 2.0];
        let f = linear_fit(&x, &y).unwrap();
        let my = 1.5;
        let ss_tot: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
        let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - f.intercept - f.slope * a).powi(2)).sum();
        assert!((f.r_squared - (1.0 - ss_res / ss_tot)).abs() < 1e-12);
        assert!((f.slope - 0.6).abs() < 1e-12);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
