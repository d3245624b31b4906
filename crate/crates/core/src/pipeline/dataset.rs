use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::derive::derive_series;
use super::discretize::{elbow_bins, quantile_discretize, DiscretizationSchema, VariableSchema};
use super::subsample::{check_uniform, nyquist_subsample};
use crate::causal::NodeKind;
use crate::env::WaypointGraph;
use crate::params::LearningParams;
use crate::sim::TimeSeriesLog;
use crate::{Error, Result};

/// One discrete column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: NodeKind,
    pub card: usize,
    /// Category labels for context columns; empty for binned system columns.
    pub labels: Vec<String>,
    pub codes: Vec<u16>,
    /// Constant across the rows of one time step.
    pub shared: bool,
}

impl Column {
    pub fn new(name: &str, kind: NodeKind, card: usize, codes: Vec<u16>, shared: bool) -> Self {
        Column {
            name: name.to_string(),
            kind,
            card,
            labels: Vec::new(),
            codes,
            shared,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = labels;
        self
    }

    /// Code of a category label, or of a decimal code written as text.
    pub fn code_of(&self, label: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .or_else(|| label.parse::<usize>().ok().filter(|&c| c < self.card))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub source: String,
    pub subsample_factor: usize,
    /// Seconds between consecutive time steps.
    pub period: f64,
    pub bandwidth: f64,
}

/// Discrete, aligned data. Rows are grouped in blocks of `stride` rows per time step
/// (one row per waypoint), so a lag-1 parent of row `r` lives in row `r - stride`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedDataset {
    pub columns: Vec<Column>,
    pub stride: usize,
    pub meta: DatasetMeta,
}

impl ProcessedDataset {
    pub fn new(columns: Vec<Column>, stride: usize) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.codes.len());
        for c in &columns {
            if c.codes.len() != rows {
                return Err(Error::invalid(&c.name, "column length mismatch"));
            }
            if let Some(&bad) = c.codes.iter().find(|&&x| x as usize >= c.card) {
                return Err(Error::invalid(&c.name, format!("code {bad} outside 0..{}", c.card)));
            }
        }
        if stride == 0 || rows % stride != 0 {
            return Err(Error::invalid("stride", "rows must be a multiple of the stride"));
        }
        Ok(ProcessedDataset {
            columns,
            stride,
            meta: DatasetMeta {
                period: 1.0,
                subsample_factor: 1,
                ..DatasetMeta::default()
            },
        })
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.codes.len())
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.index_of(name).map(|i| &self.columns[i])
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        let mut rec = Vec::with_capacity(self.columns.len());
        for r in 0..self.rows() {
            rec.clear();
            rec.extend(self.columns.iter().map(|c| c.codes[r].to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `dataset.csv` plus a `dataset.json` sidecar (columns without codes, metadata
    /// and the discretisation schema).
    pub fn save(&self, dir: &Path, schema: &DiscretizationSchema) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(dir.join("dataset.csv"))?))?;
        let columns: Vec<serde_json::Value> = self
            .columns
            .iter()
            .map(|c| {
                serde_json::json!({
                    "name": c.name, "kind": c.kind, "card": c.card, "labels": c.labels, "shared": c.shared
                })
            })
            .collect();
        let side = serde_json::json!({
            "stride": self.stride,
            "rows": self.rows(),
            "meta": self.meta,
            "columns": columns,
            "schema": schema,
        });
        std::fs::write(dir.join("dataset.json"), serde_json::to_string_pretty(&side)? + "\n")?;
        Ok(())
    }
}

fn binned(
    name: &str,
    series: &[f64],
    max_bins: usize,
    schema: &mut DiscretizationSchema,
) -> Result<Vec<usize>> {
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let distinct = sorted.len();
    let n_bins = if distinct <= max_bins {
        distinct
    } else {
        elbow_bins(series, max_bins)
    };
    let (codes, var): (Vec<usize>, VariableSchema) = quantile_discretize(series, n_bins)?;
    log::info!("{name}: {} bins, edges {:?}", var.bins(), var.edges);
    schema.variables.insert(name.to_string(), var);
    Ok(codes)
}

/// Subsamples, derives and discretises a raw log into the long-format dataset
/// (columns V, L, D, S, W, C, O; one row per time step and waypoint).
pub fn build_dataset(
    log: &TimeSeriesLog,
    graph: &WaypointGraph,
    learning: &LearningParams,
) -> Result<(ProcessedDataset, DiscretizationSchema)> {
    if log.rows.len() < 3 {
        return Err(Error::EmptyDataset);
    }
    let times: Vec<f64> = log.rows.iter().map(|r| r.t).collect();
    let period = check_uniform(&times)?;
    let nw = log.waypoint_ids.len();
    let mut series = vec![
        log.rows.iter().map(|r| r.v).collect::<Vec<f64>>(),
        log.rows.iter().map(|r| r.b).collect(),
    ];
    for w in 0..nw {
        series.push(log.rows.iter().map(|r| r.counts[w] as f64).collect());
    }
    let sub = nyquist_subsample(&series, 1.0 / period, learning.candidate_rate)?;
    let mut sublog = log.clone();
    sublog.rows = super::subsample::decimate(&log.rows, sub.factor);
    sublog.period = period * sub.factor as f64;
    let derived = derive_series(&sublog, graph)?;
    let steps = &sublog.rows[1..];
    let t = steps.len();

    let mut schema = DiscretizationSchema::default();
    let v_codes = binned("V", &steps.iter().map(|r| r.v).collect::<Vec<_>>(), learning.max_bins, &mut schema)?;
    let l_codes = binned("L", &derived.l, learning.max_bins, &mut schema)?;
    let d_flat: Vec<f64> = derived.d.iter().flatten().copied().collect();
    let d_codes = binned("D", &d_flat, learning.max_bins, &mut schema)?;

    let widen = |f: &dyn Fn(usize) -> usize| -> Vec<u16> {
        (0..t * nw).map(|r| f(r) as u16).collect()
    };
    let card = |n: &str| schema.variables[n].bins();
    let binary = || vec!["0".to_string(), "1".to_string()];
    let columns = vec![
        Column::new("V", NodeKind::System, card("V"), widen(&|r| v_codes[r / nw]), true),
        Column::new("L", NodeKind::System, card("L"), widen(&|r| l_codes[r / nw]), true),
        Column::new("D", NodeKind::System, card("D"), widen(&|r| d_codes[r]), false),
        Column::new("S", NodeKind::Context, log.slot_ids.len(), widen(&|r| steps[r / nw].s), true)
            .with_labels(log.slot_ids.clone()),
        Column::new("W", NodeKind::Context, nw, widen(&|r| r % nw), false).with_labels(log.waypoint_ids.clone()),
        Column::new("C", NodeKind::Context, 2, widen(&|r| usize::from(steps[r / nw].c)), true).with_labels(binary()),
        Column::new("O", NodeKind::Context, 2, widen(&|r| usize::from(steps[r / nw].o)), true).with_labels(binary()),
    ];
    let mut ds = ProcessedDataset::new(columns, nw)?;
    ds.meta = DatasetMeta {
        source: log.file_name(),
        subsample_factor: sub.factor,
        period: sublog.period,
        bandwidth: sub.bandwidth,
    };
    Ok((ds, schema))
}
