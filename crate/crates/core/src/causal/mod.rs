//! Lagged causal graphs, the reference warehouse structure and constrained discovery.

mod cmi;
mod dag;
mod discovery;
mod synthetic;

pub use cmi::{cmi, ci_test, CiResult, Strata};
pub use dag::{edge_f1, ground_truth_model, Edge, LaggedDag, Node, NodeKind};
pub use discovery::{discover_structure, DiscoveryConfig, DiscoveryReport};
pub use synthetic::synthetic_dataset;
