//! Discrete conditional probability tables and interventional queries.

mod factor;
mod model;
mod query;

pub use factor::Factor;
pub use model::{fit_mle, CausalInferenceModel, DiscreteCpd, Variable};
pub use query::{do_query, expected_value, QuerySpec};
