//! The four-way ablation, its metrics and tests, the weight sweep and the scalability bench.

mod approach;
mod metrics;
mod report;
mod runner;
mod scalability;
mod sensitivity;
mod stats;
mod training;

pub use approach::{ApproachConfig, Routing, APPROACH_NAMES};
pub use metrics::{
    approach_metrics, compute_metrics, pct, quantile, ApproachMetrics, BatterySplit, Comparison, DistanceSplit,
    MetricsReport, OutcomeCounts, ProxemicsSummary, RuntimeStats, TimeSplit,
};
pub use report::{
    markdown_report, metrics_csv, outcomes_csv, proxemics_csv, read_outcomes, runtime_by_approach, scalability_markdown,
    sensitivity_csv, sensitivity_markdown, tests_csv,
};
pub use runner::{run_all, run_experiment, RunResult, TaskOutcome, TaskStatus};
pub use scalability::{linear_fit, scalability_bench, LinearFit, ScalabilityReport, ScalabilityRow};
pub use sensitivity::{default_grid, sensitivity_sweep, sweep_scenario, weight_grid, SensitivityReport, SensitivityRow};
pub use stats::{chi_square_2x2, mann_whitney_u, negative_binomial_test, stat_test, StatTestResult, TestKind};
pub use training::{train_model, TRAINING_SEED};
