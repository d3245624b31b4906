use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::estimates::{ArcEstimate, Estimates};
use crate::env::WaypointGraph;
use crate::{Error, Result};

/// Two costs closer than this are treated as a tie.
const TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicWeights {
    pub lambda_delta: f64,
    pub lambda_d: f64,
    pub lambda_l: f64,
}

impl HeuristicWeights {
    pub fn new(lambda_delta: f64, lambda_d: f64, lambda_l: f64) -> Self {
        HeuristicWeights {
            lambda_delta,
            lambda_d,
            lambda_l,
        }
    }

    /// Distance only.
    pub fn shortest() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let w = [self.lambda_delta, self.lambda_d, self.lambda_l];
        if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) || w.iter().all(|&x| x == 0.0) {
            return Err(Error::invalid("weights", "must be non-negative, finite and not all zero"));
        }
        Ok(())
    }

    pub fn arc_cost(&self, a: &ArcEstimate) -> f64 {
        self.lambda_delta * a.delta + self.lambda_d * a.d_hat + self.lambda_l * a.battery_cost
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    pub path: Vec<usize>,
    pub arcs: Vec<ArcEstimate>,
    pub total_cost: f64,
    /// Predicted battery use of the whole path, %.
    pub c_l: f64,
    /// Path length, m.
    pub length: f64,
    /// A* node expansions.
    pub expansions: usize,
}

impl PathPlan {
    fn from_path(graph: &WaypointGraph, path: Vec<usize>, est: &Estimates, w: &HeuristicWeights, expansions: usize) -> Self {
        let arcs: Vec<ArcEstimate> = path.windows(2).map(|p| est.arc(graph, p[0], p[1])).collect();
        let total_cost = arcs.iter().map(|a| w.arc_cost(a)).sum();
        PathPlan {
            c_l: arcs.iter().map(|a| a.battery_cost).sum(),
            length: arcs.iter().map(|a| a.delta).sum(),
            total_cost,
            path,
            arcs,
            expansions,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Label {
    g: f64,
    arcs: usize,
    pred: Option<usize>,
}

#[derive(PartialEq)]
struct Entry {
    f: f64,
    node: usize,
    version: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn path_to(labels: &[Option<Label>], node: usize) -> Vec<usize> {
    let mut p = vec![node];
    let mut cur = node;
    while let Some(prev) = labels[cur].and_then(|l| l.pred) {
        if p.len() > labels.len() {
            break;
        }
        p.push(prev);
        cur = prev;
    }
    p.reverse();
    p
}

fn ids_less(graph: &WaypointGraph, a: &[usize], b: &[usize]) -> bool {
    a.iter().map(|&i| graph.id(i)).lt(b.iter().map(|&i| graph.id(i)))
}

/// Minimum-cost path under `w`; ties within 1e-9 go to fewer arcs, then to the
/// lexicographically smaller waypoint-id sequence. The guide is `lambda_delta` times the
/// straight-line distance, which never overestimates the remaining cost.
pub fn plan_path(
    graph: &WaypointGraph,
    start: usize,
    goal: usize,
    est: &Estimates,
    w: &HeuristicWeights,
) -> Result<PathPlan> {
    w.validate()?;
    let n = graph.len();
    let goal_pos = graph.position(goal);
    let h = |u: usize| w.lambda_delta * graph.position(u).distance(goal_pos);
    let mut labels: Vec<Option<Label>> = vec![None; n];
    let mut version = vec![0u32; n];
    let mut heap = BinaryHeap::new();
    labels[start] = Some(Label {
        g: 0.0,
        arcs: 0,
        pred: None,
    });
    heap.push(Entry {
        f: h(start),
        node: start,
        version: 0,
    });
    let mut expansions = 0;
    while let Some(Entry { f, node: u, version: ver }) = heap.pop() {
        if ver != version[u] {
            continue;
        }
        if let Some(best) = labels[goal] {
            if u != goal && f > best.g + TIE {
                break;
            }
        }
        if u == goal {
            continue;
        }
        expansions += 1;
        let lu = labels[u].expect("queued nodes are labelled");
        let pu = path_to(&labels, u);
        for &(v, _) in graph.neighbours(u) {
            if pu.contains(&v) {
                continue;
            }
            let g = lu.g + w.arc_cost(&est.arc(graph, u, v));
            let cand = Label {
                g,
                arcs: lu.arcs + 1,
                pred: Some(u),
            };
            let better = match labels[v] {
                None => true,
                Some(old) => {
                    if g < old.g - TIE {
                        true
                    } else if g > old.g + TIE {
                        false
                    } else if cand.arcs != old.arcs {
                        cand.arcs < old.arcs
                    } else {
                        let mut pn = pu.clone();
                        pn.push(v);
                        ids_less(graph, &pn, &path_to(&labels, v))
                    }
                }
            };
            if better {
                labels[v] = Some(cand);
                version[v] += 1;
                heap.push(Entry {
                    f: g + h(v),
                    node: v,
                    version: version[v],
                });
            }
        }
    }
    if labels[goal].is_none() {
        return Err(Error::NoPath(graph.id(start).into(), graph.id(goal).into()));
    }
    Ok(PathPlan::from_path(graph, path_to(&labels, goal), est, w, expansions))
}
