use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::causal::{LaggedDag, NodeKind};
use crate::pipeline::{DiscretizationSchema, ProcessedDataset};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: NodeKind,
    pub card: usize,
    /// Category labels (context variables); empty for binned variables.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

/// `P(node | parents)`. Rows enumerate parent assignments row-major (last parent fastest);
/// each row holds `card` probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCpd {
    pub node: String,
    pub parents: Vec<(String, u8)>,
    pub card: usize,
    pub parent_cards: Vec<usize>,
    pub table: Vec<f64>,
}

impl DiscreteCpd {
    pub fn rows(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn row_index(&self, parent_values: &[usize]) -> usize {
        parent_values
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (v, c)| acc * c + v)
    }

    pub fn row(&self, parent_values: &[usize]) -> &[f64] {
        let r = self.row_index(parent_values);
        &self.table[r * self.card..(r + 1) * self.card]
    }
}

/// A fitted discrete causal model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalInferenceModel {
    pub dag: LaggedDag,
    pub schema: DiscretizationSchema,
    pub variables: Vec<Variable>,
    pub cpds: Vec<DiscreteCpd>,
    /// Empirical marginal of every variable (used for unspecified lagged parents).
    pub marginals: BTreeMap<String, Vec<f64>>,
    /// Seconds between samples in the training data.
    pub period: f64,
    /// Parent combinations never seen in training (filled with uniform rows).
    pub fallback_rows: usize,
}

impl CausalInferenceModel {
    pub fn variable(&self, name: &str) -> Result<&Variable> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn cpd(&self, name: &str) -> Result<&DiscreteCpd> {
        self.cpds
            .iter()
            .find(|c| c.node == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Code of a category label (or of a decimal code) for a variable.
    pub fn code(&self, name: &str, label: &str) -> Result<usize> {
        let v = self.variable(name)?;
        v.labels
            .iter()
            .position(|l| l == label)
            .or_else(|| label.parse::<usize>().ok().filter(|&c| c < v.card))
            .ok_or_else(|| Error::InvalidQuery(format!("{name} has no value {label:?}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: CausalInferenceModel = serde_json::from_str(text)?;
        m.dag.validate()?;
        for cpd in &m.cpds {
            if cpd.table.len() != cpd.rows() * cpd.card {
                return Err(Error::invalid(format!("cpds.{}", cpd.node), "table size mismatch"));
            }
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Maximum-likelihood CPTs for every node of `dag` from `data`. Lag-1 parents are read from
/// the row one time step earlier; parent combinations never observed get a uniform row.
pub fn fit_mle(dag: &LaggedDag, data: &ProcessedDataset, schema: &DiscretizationSchema) -> Result<CausalInferenceModel> {
    dag.validate()?;
    if data.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let stride = data.stride;
    let mut variables = Vec::new();
    let mut marginals = BTreeMap::new();
    for node in &dag.nodes {
        let col = data.column(&node.name)?;
        variables.push(Variable {
            name: node.name.clone(),
            kind: node.kind,
            card: col.card,
            labels: col.labels.clone(),
        });
        let mut m = vec![0.0; col.card];
        for &c in &col.codes {
            m[c as usize] += 1.0;
        }
        let n = col.codes.len() as f64;
        m.iter_mut().for_each(|x| *x /= n);
        marginals.insert(node.name.clone(), m);
    }
    let mut cpds = Vec::new();
    let mut fallback_rows = 0;
    for node in &dag.nodes {
        let col = data.column(&node.name)?;
        let parents = dag.parents(&node.name);
        let pcols = parents
            .iter()
            .map(|(p, lag)| data.column(p).map(|c| (c, *lag as usize * stride)))
            .collect::<Result<Vec<_>>>()?;
        let parent_cards: Vec<usize> = pcols.iter().map(|(c, _)| c.card).collect();
        let rows: usize = parent_cards.iter().product();
        let start = if parents.iter().any(|(_, lag)| *lag > 0) { stride } else { 0 };
        let mut counts = vec![0u64; rows * col.card];
        for r in start..data.rows() {
            let idx = pcols
                .iter()
                .fold(0usize, |acc, (c, off)| acc * c.card + c.codes[r - off] as usize);
            counts[idx * col.card + col.codes[r] as usize] += 1;
        }
        let mut table = vec![0.0; rows * col.card];
        for row in 0..rows {
            let cells = &counts[row * col.card..(row + 1) * col.card];
            let total: u64 = cells.iter().sum();
            let out = &mut table[row * col.card..(row + 1) * col.card];
            if total == 0 {
                fallback_rows += 1;
                out.iter_mut().for_each(|x| *x = 1.0 / col.card as f64);
            } else {
                for (o, &c) in out.iter_mut().zip(cells) {
                    *o = c as f64 / total as f64;
                }
            }
        }
        cpds.push(DiscreteCpd {
            node: node.name.clone(),
            parents,
            card: col.card,
            parent_cards,
            table,
        });
    }
    if fallback_rows > 0 {
        log::info!("fit_mle: {fallback_rows} unseen parent combinations use uniform rows");
    }
    Ok(CausalInferenceModel {
        dag: dag.clone(),
        schema: schema.clone(),
        variables,
        cpds,
        marginals,
        period: data.meta.period,
        fallback_rows,
    })
}
