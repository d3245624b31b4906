//! From raw logs to discrete, aligned datasets.

mod dataset;
mod derive;
mod discretize;
mod subsample;

pub use dataset::{build_dataset, Column, DatasetMeta, ProcessedDataset};
pub use derive::{derive_series, DerivedSeries};
pub use discretize::{
    elbow_bins, quantile_discretize, quantile_edges, within_variance, DiscretizationSchema, VariableSchema,
};
pub use subsample::{bandwidth, check_uniform, decimate, nyquist_subsample, Subsampled};
