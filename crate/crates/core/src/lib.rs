//! Causal decision making for a mobile robot sharing a warehouse with people.
//!
//! The crate is organised as a pipeline:
//!
//! * [`env`] loads the waypoint map and the time-slot schedule.
//! * [`sim`] runs the kinematic crowd / robot / battery simulation and logs time series.
//! * [`pipeline`] subsamples, derives and discretises the logged series.
//! * [`causal`] holds lagged causal graphs, the reference structure and a constrained
//!   conditional-independence discovery.
//! * [`inference`] fits conditional probability tables and answers interventional queries.
//! * [`planner`] turns query results into arc costs, runs A* and decides whether to accept a task.
//! * [`harness`] runs the four-way ablation, metrics, statistical tests and benchmarks.

pub mod causal;
pub mod env;
mod error;
pub mod fmt;
pub mod harness;
pub mod inference;
pub mod params;
pub mod pipeline;
pub mod planner;
pub mod sim;

pub use error::{Error, Result};
