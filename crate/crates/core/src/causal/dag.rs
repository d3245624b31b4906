use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// Exogenous context (time-slot, waypoint, charging, obstacle).
    Context,
    /// Robot or environment state driven by the contexts.
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

/// `src` at time `t - lag` causes `dst` at time `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    pub lag: u8,
}

impl Edge {
    pub fn new(src: &str, dst: &str, lag: u8) -> Self {
        Edge {
            src: src.to_string(),
            dst: dst.to_string(),
            lag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaggedDag {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// Contemporaneous adjacencies whose direction could not be decided.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undirected: Vec<(String, String)>,
    /// Significance level used by discovery, when the graph was discovered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl LaggedDag {
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self> {
        let dag = LaggedDag {
            nodes,
            edges,
            undirected: Vec::new(),
            alpha: None,
        };
        dag.validate()?;
        Ok(dag)
    }

    pub fn node(&self, name: &str) -> Result<&Node> {
        self.nodes
            .iter()
            .find(|n| n.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn kind(&self, name: &str) -> Result<NodeKind> {
        self.node(name).map(|n| n.kind)
    }

    /// Parents of `name` as `(parent, lag)`, contemporaneous first, in node order.
    pub fn parents(&self, name: &str) -> Vec<(String, u8)> {
        let order: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.name.as_str(), i)).collect();
        let mut p: Vec<(String, u8)> = self
            .edges
            .iter()
            .filter(|e| e.dst == name)
            .map(|e| (e.src.clone(), e.lag))
            .collect();
        p.sort_by_key(|(s, lag)| (*lag, order.get(s.as_str()).copied().unwrap_or(usize::MAX)));
        p
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges.iter().cloned().collect()
    }

    /// Checks the structural invariants: known nodes, lags in {0, 1}, nothing causes a
    /// context, context edges are contemporaneous, lagged edges leave system nodes and the
    /// contemporaneous subgraph is acyclic.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !seen.insert(n.name.as_str()) {
                return Err(Error::invalid(format!("nodes[{i}]"), format!("duplicate node {}", n.name)));
            }
        }
        let mut edges = BTreeSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            let path = format!("edges[{i}]");
            let src = self.kind(&e.src).map_err(|_| Error::invalid(&path, format!("unknown node {}", e.src)))?;
            let dst = self.kind(&e.dst).map_err(|_| Error::invalid(&path, format!("unknown node {}", e.dst)))?;
            if e.lag > 1 {
                return Err(Error::invalid(&path, "lag must be 0 or 1"));
            }
            if dst == NodeKind::Context {
                return Err(Error::invalid(&path, format!("edge into context node {}", e.dst)));
            }
            if src == NodeKind::Context && e.lag != 0 {
                return Err(Error::invalid(&path, "context edges must be contemporaneous"));
            }
            if e.lag == 0 && e.src == e.dst {
                return Err(Error::invalid(&path, "contemporaneous self-loop"));
            }
            if !edges.insert(e) {
                return Err(Error::invalid(&path, "duplicate edge"));
            }
        }
        // Kahn's algorithm on the lag-0 subgraph
        let idx: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.name.as_str(), i)).collect();
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut out = vec![Vec::new(); n];
        for e in self.edges.iter().filter(|e| e.lag == 0) {
            out[idx[e.src.as_str()]].push(idx[e.dst.as_str()]);
            indeg[idx[e.dst.as_str()]] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut visited = 0;
        while let Some(u) = stack.pop() {
            visited += 1;
            for &v in &out[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    stack.push(v);
                }
            }
        }
        if visited != n {
            return Err(Error::invalid("edges", "contemporaneous cycle"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dag: LaggedDag = serde_json::from_str(text)?;
        dag.validate()?;
        Ok(dag)
    }
}

/// The warehouse structure: obstacles and charging drive speed and battery use, speed drives
/// battery use, waypoint and time-slot drive people density, and density is autocorrelated.
pub fn ground_truth_model() -> LaggedDag {
    let nodes = [
        ("V", NodeKind::System),
        ("L", NodeKind::System),
        ("D", NodeKind::System),
        ("S", NodeKind::Context),
        ("W", NodeKind::Context),
        ("C", NodeKind::Context),
        ("O", NodeKind::Context),
    ]
    .iter()
    .map(|&(name, kind)| Node {
        name: name.to_string(),
        kind,
    })
    .collect();
    let edges = [
        ("O", "L", 0),
        ("O", "V", 0),
        ("C", "L", 0),
        ("C", "V", 0),
        ("V", "L", 0),
        ("W", "D", 0),
        ("S", "D", 0),
        ("D", "D", 1),
    ]
    .iter()
    .map(|&(s, d, lag)| Edge::new(s, d, lag))
    .collect();
    LaggedDag::new(nodes, edges).expect("reference structure is valid")
}

/// Edge-level F1 of `found` against `truth`. Undirected adjacencies count as one false
/// positive and, when `truth` has the edge, one false negative.
pub fn edge_f1(found: &LaggedDag, truth: &LaggedDag) -> f64 {
    let f = found.edge_set();
    let t = truth.edge_set();
    let tp = f.intersection(&t).count();
    let fp = f.difference(&t).count() + found.undirected.len();
    let fn_ = t.difference(&f).count();
    if tp == 0 {
        return if fp == 0 && fn_ == 0 { 1.0 } else { 0.0 };
    }
    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_truth_edges() {
        let g = ground_truth_model();
        assert_eq!(g.edges.len(), 8);
        let expect: BTreeSet<Edge> = [
            Edge::new("O", "L", 0),
            Edge::new("O", "V", 0),
            Edge::new("C", "L", 0),
            Edge::new("C", "V", 0),
            Edge::new("V", "L", 0),
            Edge::new("W", "D", 0),
            Edge::new("S", "D", 0),
            Edge::new("D", "D", 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(g.edge_set(), expect);
        assert!(g.validate().is_ok());
        assert_eq!(g.parents("L"), vec![("V".into(), 0), ("C".into(), 0), ("O".into(), 0)]);
    }

    #[test]
    fn json_round_trip() {
        let g = ground_truth_model();
        assert_eq!(LaggedDag::from_json(&g.to_json().unwrap()).unwrap(), g);
    }

    #[test]
    fn invariants_rejected() {
        let g = ground_truth_model();
        let bad = |e: Edge| {
            let mut h = g.clone();
            h.edges.push(e);
            h.validate().is_err()
        };
        assert!(bad(Edge::new("V", "O", 0)));
        assert!(bad(Edge::new("S", "V", 1)));
        assert!(bad(Edge::new("L", "V", 0)));
        assert!(bad(Edge::new("V", "V", 0)));
        assert!(bad(Edge::new("V", "L", 2)));
        assert!(!bad(Edge::new("L", "V", 1)));
    }

    #[test]
    fn f1_counts_undirected_as_errors() {
        let truth = ground_truth_model();
        assert_eq!(edge_f1(&truth, &truth), 1.0);
        let mut g = truth.clone();
        g.edges.retain(|e| !(e.src == "V" && e.dst == "L"));
        g.undirected.push(("V".into(), "L".into()));
        let f1 = edge_f1(&g, &truth);
        assert!((f1 - 14.0 / 16.0).abs() < 1e-12);
    }
}
