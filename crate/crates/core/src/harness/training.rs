use crate::causal::{ground_truth_model, LaggedDag};
use crate::env::Scenario;
use crate::inference::{fit_mle, CausalInferenceModel};
use crate::params::Params;
use crate::pipeline::build_dataset;
use crate::sim::collect_training_log;
use crate::Result;

/// Seed of the data-collection run behind the experiment models; kept apart from the
/// evaluation seeds so that no evaluation crowd was seen during training.
pub const TRAINING_SEED: u64 = 1000;

/// Collects a training log on `scenario`, builds the dataset and fits `dag` (the reference
/// structure when `None`).
pub fn train_model(scenario: &Scenario, params: &Params, seed: u64, dag: Option<&LaggedDag>) -> Result<CausalInferenceModel> {
    let log = collect_training_log(scenario, params, seed)?;
    let (data, schema) = build_dataset(&log, &scenario.graph, &params.learning)?;
    let truth;
    let dag = match dag {
        Some(d) => d,
        None => {
            truth = ground_truth_model();
            &truth
        }
    };
    fit_mle(dag, &data, &schema)
}
