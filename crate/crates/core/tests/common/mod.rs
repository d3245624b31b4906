//! Independent oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use causalnav::causal::{Edge, LaggedDag, Node, NodeKind};
use causalnav::env::{Point, RegionLabel, Waypoint, WaypointGraph};
use causalnav::inference::{CausalInferenceModel, DiscreteCpd, Variable};
use causalnav::pipeline::DiscretizationSchema;
use causalnav::planner::{Estimates, HeuristicWeights};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive random distribution over `k` outcomes.
fn simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Builds a model from named nodes, their cardinalities and lag-0 parent lists, with random
/// strictly positive tables. Nodes must be listed in topological order.
pub fn model_from(rng: &mut ChaCha8Rng, nodes: &[(&str, NodeKind, usize)], parents: &[(&str, &[&str])]) -> CausalInferenceModel {
    let card: BTreeMap<&str, usize> = nodes.iter().map(|(n, _, c)| (*n, *c)).collect();
    let pa: BTreeMap<&str, &[&str]> = parents.iter().copied().collect();
    let dag = LaggedDag::new(
        nodes
            .iter()
            .map(|(n, k, _)| Node {
                name: n.to_string(),
                kind: *k,
            })
            .collect(),
        parents
            .iter()
            .flat_map(|(d, ps)| ps.iter().map(move |p| Edge::new(p, d, 0)))
            .collect(),
    )
    .expect("valid test structure");
    let mut variables = Vec::new();
    let mut cpds = Vec::new();
    let mut marginals = BTreeMap::new();
    for (name, kind, c) in nodes {
        let ps: Vec<&str> = pa.get(name).map(|p| p.to_vec()).unwrap_or_default();
        let parent_cards: Vec<usize> = ps.iter().map(|p| card[p]).collect();
        let rows: usize = parent_cards.iter().product();
        let table: Vec<f64> = (0..rows).flat_map(|_| simplex(rng, *c)).collect();
        variables.push(Variable {
            name: name.to_string(),
            kind: *kind,
            card: *c,
            labels: Vec::new(),
        });
        cpds.push(DiscreteCpd {
            node: name.to_string(),
            parents: ps.iter().map(|p| (p.to_string(), 0)).collect(),
            card: *c,
            parent_cards,
            table,
        });
        marginals.insert(name.to_string(), vec![1.0 / *c as f64; *c]);
    }
    CausalInferenceModel {
        dag,
        schema: DiscretizationSchema::default(),
        variables,
        cpds,
        marginals,
        period: 1.0,
        fallback_rows: 0,
    }
}

/// Random contemporaneous network with at most `max_nodes` nodes and `max_card` bins. Up to two
/// parentless context nodes come first; every later node draws parents among earlier ones.
pub fn random_network(rng: &mut ChaCha8Rng, max_nodes: usize, max_card: usize) -> CausalInferenceModel {
    let n = rng.random_range(2..=max_nodes);
    let n_ctx = rng.random_range(1..=2.min(n - 1));
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let nodes: Vec<(&str, NodeKind, usize)> = names
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let kind = if i < n_ctx { NodeKind::Context } else { NodeKind::System };
            (s.as_str(), kind, rng.random_range(2..=max_card))
        })
        .collect();
    let mut parent_lists: Vec<Vec<&str>> = vec![Vec::new(); n];
    for i in n_ctx..n {
        for j in 0..i {
            if rng.random_bool(0.5) {
                parent_lists[i].push(names[j].as_str());
            }
        }
    }
    let parents: Vec<(&str, &[&str])> = (0..n).map(|i| (names[i].as_str(), parent_lists[i].as_slice())).collect();
    model_from(rng, &nodes, &parents)
}

/// `P(target | do(interventions), conditions)` by summing the truncated joint over every
/// assignment. `None` when the conditioning event has probability zero.
pub fn enumerate_query(
    model: &CausalInferenceModel,
    interventions: &[(usize, usize)],
    conditions: &[(usize, usize)],
    target: usize,
) -> Option<Vec<f64>> {
    let n = model.variables.len();
    let cards: Vec<usize> = model.variables.iter().map(|v| v.card).collect();
    let pidx: Vec<Vec<usize>> = model
        .cpds
        .iter()
        .map(|c| {
            c.parents
                .iter()
                .map(|(p, _)| model.variables.iter().position(|v| &v.name == p).unwrap())
                .collect()
        })
        .collect();
    let mut out = vec![0.0; cards[target]];
    let mut x = vec![0usize; n];
    loop {
        let fixed_ok = interventions.iter().chain(conditions).all(|&(i, v)| x[i] == v);
        if fixed_ok {
            let mut w = 1.0;
            for i in 0..n {
                if interventions.iter().any(|&(j, _)| j == i) {
                    continue;
                }
                let pv: Vec<usize> = pidx[i].iter().map(|&p| x[p]).collect();
                w *= model.cpds[i].row(&pv)[x[i]];
            }
            out[x[target]] += w;
        }
        let mut k = 0;
        loop {
            if k == n {
                let z: f64 = out.iter().sum();
                return (z > 0.0).then(|| out.iter().map(|p| p / z).collect());
            }
            x[k] += 1;
            if x[k] < cards[k] {
                break;
            }
            x[k] = 0;
            k += 1;
        }
    }
}

/// The confounded battery structure: obstacle O drives both speed V and battery change L,
/// and V drives L. `P(L | do(V))` must equal the adjustment over O.
pub fn backdoor_network(rng: &mut ChaCha8Rng) -> CausalInferenceModel {
    model_from(
        rng,
        &[("O", NodeKind::Context, 2), ("V", NodeKind::System, 3), ("L", NodeKind::System, 4)],
        &[("V", &["O"]), ("L", &["O", "V"])],
    )
}

/// Slot S and waypoint W jointly cause density D; intervening on S while conditioning on W
/// must match plain conditioning on both.
pub fn density_network(rng: &mut ChaCha8Rng) -> CausalInferenceModel {
    model_from(
        rng,
        &[("S", NodeKind::Context, 4), ("W", NodeKind::Context, 3), ("D", NodeKind::System, 4)],
        &[("D", &["S", "W"])],
    )
}

/// Backdoor sum `sum_o P(L | v, o) P(o)` on [`backdoor_network`].
pub fn backdoor_oracle(model: &CausalInferenceModel, v: usize) -> Vec<f64> {
    let p_o = model.cpds[0].row(&[]).to_vec();
    let l = &model.cpds[2];
    (0..l.card)
        .map(|k| p_o.iter().enumerate().map(|(o, po)| l.row(&[o, v])[k] * po).sum())
        .collect()
}

pub fn wp(id: &str, x: f64, y: f64) -> Waypoint {
    Waypoint {
        id: id.to_string(),
        position: Point::new(x, y),
        radius: 1.0,
        label: RegionLabel::Shelf,
    }
}

/// Connected random graph: a random spanning tree plus extra arcs, positions in a 20 m square.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> WaypointGraph {
    let ids: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let wps: Vec<Waypoint> = ids
        .iter()
        .map(|id| wp(id, rng.random_range(0.0..20.0), rng.random_range(0.0..20.0)))
        .collect();
    let mut arcs: Vec<(String, String)> = Vec::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        arcs.push((ids[j].clone(), ids[i].clone()));
    }
    for i in 0..n {
        for j in i + 1..n {
            let exists = arcs.iter().any(|(a, b)| (a == &ids[i] && b == &ids[j]) || (a == &ids[j] && b == &ids[i]));
            if !exists && rng.random_bool(0.3) {
                arcs.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    WaypointGraph::new(wps, &arcs, &[ids[0].clone()], &ids[0]).expect("connected by construction")
}

pub fn random_estimates(rng: &mut ChaCha8Rng, graph: &WaypointGraph) -> Estimates {
    let mut est = Estimates::flat(graph, 0.0, -rng.random_range(0.001..0.02), 0.5);
    for d in est.d_hat.iter_mut() {
        *d = if rng.random_bool(0.4) { rng.random_range(0.0..2.0) } else { 0.0 };
    }
    est
}

/// Cheapest simple path by exhaustive depth-first search; cost summed along the path.
pub fn brute_force_path(
    graph: &WaypointGraph,
    from: usize,
    to: usize,
    est: &Estimates,
    w: &HeuristicWeights,
) -> Option<(f64, Vec<usize>)> {
    fn dfs(
        g: &WaypointGraph,
        path: &mut Vec<usize>,
        to: usize,
        est: &Estimates,
        w: &HeuristicWeights,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let u = *path.last().unwrap();
        if u == to {
            let cost: f64 = path.windows(2).map(|p| w.arc_cost(&est.arc(g, p[0], p[1]))).sum();
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                *best = Some((cost, path.clone()));
            }
            return;
        }
        for &(v, _) in g.neighbours(u) {
            if !path.contains(&v) {
                path.push(v);
                dfs(g, path, to, est, w, best);
                path.pop();
            }
        }
    }
    let mut best = None;
    dfs(graph, &mut vec![from], to, est, w, &mut best);
    best
}

/// Two well separated clusters of distinct values.
pub fn two_cluster_fixture() -> Vec<f64> {
    let mut r = rng(5);
    let mut v: Vec<f64> = (0..400).map(|_| r.random_range(0.0..1.0)).collect();
    v.extend((0..400).map(|_| r.random_range(100.0..101.0)));
    v
}
