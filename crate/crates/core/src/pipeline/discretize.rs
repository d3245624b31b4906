use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bins of one continuous variable.
///
/// Bin `i` covers `(edges[i-1], edges[i]]`; the first bin is closed below and values outside
/// the training range clamp to the outermost bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSchema {
    /// Inner edges, strictly increasing; `bins - 1` of them.
    pub edges: Vec<f64>,
    /// Training minimum and maximum.
    pub lo: f64,
    pub hi: f64,
    /// Mean of the training samples in each bin.
    pub representatives: Vec<f64>,
    pub counts: Vec<usize>,
}

impl VariableSchema {
    pub fn bins(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn lookup(&self, x: f64) -> usize {
        self.edges.partition_point(|&e| e < x)
    }

    /// Lower and upper bound of bin `i` within the training range.
    pub fn bounds(&self, i: usize) -> (f64, f64) {
        let low = if i == 0 { self.lo } else { self.edges[i - 1] };
        let high = if i + 1 == self.bins() { self.hi } else { self.edges[i] };
        (low, high)
    }
}

/// Bin definitions for every discretised variable, keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSchema {
    pub variables: BTreeMap<String, VariableSchema>,
}

impl DiscretizationSchema {
    pub fn get(&self, name: &str) -> Result<&VariableSchema> {
        self.variables
            .get(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

fn sorted(series: &[f64]) -> Vec<f64> {
    let mut s = series.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn distinct(sorted: &[f64]) -> Vec<f64> {
    let mut d = sorted.to_vec();
    d.dedup();
    d
}

/// Inner edges at the `i / n_bins` empirical quantiles (`sorted[ceil(i N / n) - 1]`).
///
/// With no more distinct values than bins, every distinct value gets its own bin. Edges that
/// coincide (ties) are merged and an edge at the maximum steps down to the previous distinct
/// value, so fewer than `n_bins` bins may come back.
pub fn quantile_edges(series: &[f64], n_bins: usize) -> Vec<f64> {
    let s = sorted(series);
    if s.is_empty() || n_bins <= 1 {
        return Vec::new();
    }
    let d = distinct(&s);
    if d.len() <= n_bins {
        return d[..d.len() - 1].to_vec();
    }
    let n = s.len();
    let max = s[n - 1];
    let mut edges: Vec<f64> = Vec::with_capacity(n_bins - 1);
    for i in 1..n_bins {
        let idx = (i * n).div_ceil(n_bins) - 1;
        let mut e = s[idx];
        if e >= max {
            let k = d.partition_point(|&x| x < max);
            if k == 0 {
                continue;
            }
            e = d[k - 1];
        }
        if edges.last().is_some_and(|&last| last >= e) {
            continue;
        }
        edges.push(e);
    }
    if edges.len() + 1 < n_bins {
        log::info!("quantile binning: {} bins requested, {} after merging ties", n_bins, edges.len() + 1);
    }
    edges
}

fn schema_for(series: &[f64], edges: Vec<f64>) -> (Vec<usize>, VariableSchema) {
    let bins = edges.len() + 1;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    let codes: Vec<usize> = series
        .iter()
        .map(|&x| {
            let b = edges.partition_point(|&e| e < x);
            sums[b] += x;
            counts[b] += 1;
            b
        })
        .collect();
    let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let schema = VariableSchema {
        representatives: sums.iter().zip(&counts).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect(),
        edges,
        lo,
        hi,
        counts,
    };
    (codes, schema)
}

/// Quantile discretisation; returns per-sample bin codes and the bin schema.
pub fn quantile_discretize(series: &[f64], n_bins: usize) -> Result<(Vec<usize>, VariableSchema)> {
    if series.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_bins == 0 {
        return Err(Error::Parse("n_bins must be at least 1".into()));
    }
    Ok(schema_for(series, quantile_edges(series, n_bins)))
}

/// Mean squared deviation from the bin means under `k`-bin quantile binning.
pub fn within_variance(series: &[f64], k: usize) -> f64 {
    let (codes, schema) = schema_for(series, quantile_edges(series, k));
    let ss: f64 = series
        .iter()
        .zip(&codes)
        .map(|(&x, &b)| (x - schema.representatives[b]).powi(2))
        .sum();
    ss / series.len() as f64
}

/// Elbow of the within-bin variance curve `W(1..=max_bins)`: the `k` farthest from the chord
/// joining its end points (smallest `k` on ties).
pub fn elbow_bins(series: &[f64], max_bins: usize) -> usize {
    if series.is_empty() || max_bins <= 1 {
        return 1;
    }
    let w: Vec<f64> = (1..=max_bins).map(|k| within_variance(series, k)).collect();
    let (w1, wk) = (w[0], w[max_bins - 1]);
    if w1 <= 0.0 {
        return 1;
    }
    let span = (max_bins - 1) as f64;
    let mut best = (1, 0.0);
    for (i, &wi) in w.iter().enumerate() {
        // numerator of the point-to-line distance; the denominator is the same for every k
        let dist = ((wk - w1) * i as f64 - span * (wi - w1)).abs();
        if dist > best.1 + 1e-12 * w1 * span {
            best = (i + 1, dist);
        }
    }
    best.0
}
