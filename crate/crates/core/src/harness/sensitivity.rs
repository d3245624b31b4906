use serde::{Deserialize, Serialize};

use super::approach::{ApproachConfig, Routing};
use super::metrics::{approach_metrics, ApproachMetrics};
use super::runner::run_experiment;
use crate::env::{Scenario, ScenarioSchedule};
use crate::inference::CausalInferenceModel;
use crate::params::Params;
use crate::planner::HeuristicWeights;
use crate::Result;

/// Cartesian product of the three weight axes, lambda_delta-major.
pub fn weight_grid(deltas: &[f64], densities: &[f64], batteries: &[f64]) -> Vec<HeuristicWeights> {
    let mut grid = Vec::with_capacity(deltas.len() * densities.len() * batteries.len());
    for &a in deltas {
        for &b in densities {
            for &c in batteries {
                grid.push(HeuristicWeights::new(a, b, c));
            }
        }
    }
    grid
}

/// The 27-point grid: lambda_delta in {0.1, 1, 10}, lambda_D in {1, 10, 100},
/// lambda_L in {0.5, 5, 50}.
pub fn default_grid() -> Vec<HeuristicWeights> {
    weight_grid(&[0.1, 1.0, 10.0], &[1.0, 10.0, 100.0], &[0.5, 5.0, 50.0])
}

/// `scenario` cut down to `slots`, each with its first `tasks` tasks.
pub fn sweep_scenario(scenario: &Scenario, slots: &[&str], tasks: usize) -> Result<Scenario> {
    let mut kept = Vec::with_capacity(slots.len());
    for id in slots {
        let mut s = scenario.schedule.slots[scenario.schedule.slot_index(id)?].clone();
        s.task_count = tasks.max(1);
        kept.push(s);
    }
    Ok(Scenario {
        name: scenario.name.clone(),
        population: scenario.population,
        graph: scenario.graph.clone(),
        schedule: ScenarioSchedule { slots: kept },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub weights: HeuristicWeights,
    pub metrics: ApproachMetrics,
    /// No collisions and every task completed.
    pub survives: bool,
    pub is_default: bool,
    /// 1-based position among the survivors.
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub seed: u64,
    /// Survivors in rank order, then the excluded configurations in grid order.
    pub rows: Vec<SensitivityRow>,
}

impl SensitivityReport {
    pub fn survivors(&self) -> impl Iterator<Item = &SensitivityRow> {
        self.rows.iter().filter(|r| r.survives)
    }

    pub fn default_row(&self) -> Option<&SensitivityRow> {
        self.rows.iter().find(|r| r.is_default)
    }
}

/// Runs the full framework once per weight configuration, drops every configuration with a
/// collision or an unfinished task, and ranks the rest by total time, then distance, then
/// battery use.
pub fn sensitivity_sweep(
    scenario: &Scenario,
    model: &CausalInferenceModel,
    params: &Params,
    grid: &[HeuristicWeights],
    seed: u64,
    default: HeuristicWeights,
) -> Result<SensitivityReport> {
    let mut rows = Vec::with_capacity(grid.len());
    for w in grid {
        let mut approach = ApproachConfig::new("full-causal", Routing::Causal, true, params);
        approach.weights = *w;
        let run = run_experiment(scenario, &approach, Some(model), params, seed)?;
        let label = format!("({}, {}, {})", w.lambda_delta, w.lambda_d, w.lambda_l);
        let metrics = approach_metrics(&label, &[&run.outcomes])?;
        let survives = metrics.collisions == 0 && metrics.counts.success == metrics.counts.tasks;
        rows.push(SensitivityRow {
            weights: *w,
            metrics,
            survives,
            is_default: *w == default,
            rank: None,
        });
    }
    let key = |r: &SensitivityRow| {
        (
            r.metrics.time.total_s(),
            r.metrics.distance.total_m(),
            r.metrics.battery.total_cycles(),
        )
    };
    let (mut kept, dropped): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.survives);
    kept.sort_by(|a, b| {
        let (x, y) = (key(a), key(b));
        x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.total_cmp(&y.2))
    });
    for (i, r) in kept.iter_mut().enumerate() {
        r.rank = Some(i + 1);
    }
    kept.extend(dropped);
    Ok(SensitivityReport { seed, rows: kept })
}
