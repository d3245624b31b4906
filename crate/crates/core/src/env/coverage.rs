use super::graph::WaypointGraph;
use crate::Result;

/// Largest instance solved exactly by dynamic programming.
const EXACT_LIMIT: usize = 14;

/// Open tour through every waypoint, expanded into graph arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRoute {
    /// Visiting order of all waypoints (each exactly once).
    pub order: Vec<usize>,
    /// Consecutive graph arcs travelled; each becomes one cleaning task.
    pub arcs: Vec<(usize, usize)>,
    /// Total metric length in metres.
    pub length: f64,
}

/// Shortest open tour visiting every waypoint of a connected graph.
///
/// Distances are shortest-path lengths over the graph, so consecutive stops that are not
/// adjacent get expanded into the arcs of the path between them.
pub fn coverage_route(graph: &WaypointGraph) -> Result<CoverageRoute> {
    // `WaypointGraph` is connected by construction; re-checking keeps the contract explicit.
    let dist = graph.distance_matrix();
    if let Some(j) = dist[0].iter().position(|d| !d.is_finite()) {
        return Err(crate::Error::Disconnected(graph.id(j).into(), graph.id(0).into()));
    }
    let order = if graph.len() <= EXACT_LIMIT {
        path_tsp_exact(&dist)
    } else {
        path_tsp_heuristic(&dist)
    };
    let mut arcs = Vec::new();
    for pair in order.windows(2) {
        let (path, _) = graph
            .shortest_path(pair[0], pair[1])
            .expect("connected graph");
        arcs.extend(path.windows(2).map(|w| (w[0], w[1])));
    }
    let length = tour_length(&dist, &order);
    Ok(CoverageRoute { order, arcs, length })
}

pub(crate) fn tour_length(dist: &[Vec<f64>], order: &[usize]) -> f64 {
    order.windows(2).map(|w| dist[w[0]][w[1]]).sum()
}

/// Held-Karp over open paths with a free start.
pub(crate) fn path_tsp_exact(dist: &[Vec<f64>]) -> Vec<usize> {
    let n = dist.len();
    if n <= 1 {
        return (0..n).collect();
    }
    let full = 1usize << n;
    let mut cost = vec![f64::INFINITY; full * n];
    let mut parent = vec![usize::MAX; full * n];
    for i in 0..n {
        cost[(1 << i) * n + i] = 0.0;
    }
    for mask in 1..full {
        for last in 0..n {
            let c = cost[mask * n + last];
            if !c.is_finite() || mask & (1 << last) == 0 {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let m2 = mask | (1 << next);
                let nc = c + dist[last][next];
                if nc < cost[m2 * n + next] {
                    cost[m2 * n + next] = nc;
                    parent[m2 * n + next] = last;
                }
            }
        }
    }
    let last_mask = full - 1;
    let mut end = 0;
    for i in 1..n {
        if cost[last_mask * n + i] < cost[last_mask * n + end] {
            end = i;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut mask = last_mask;
    let mut cur = end;
    loop {
        order.push(cur);
        let p = parent[mask * n + cur];
        mask &= !(1 << cur);
        if p == usize::MAX {
            break;
        }
        cur = p;
    }
    order.reverse();
    order
}

/// Nearest-neighbour construction from every start, each polished by 2-opt; best tour wins.
pub(crate) fn path_tsp_heuristic(dist: &[Vec<f64>]) -> Vec<usize> {
    let n = dist.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for start in 0..n {
        let mut order = nearest_neighbour(dist, start);
        two_opt(dist, &mut order);
        let len = tour_length(dist, &order);
        if best.as_ref().is_none_or(|(b, _)| len < *b - 1e-12) {
            best = Some((len, order));
        }
    }
    best.map(|(_, o)| o).unwrap_or_default()
}

fn nearest_neighbour(dist: &[Vec<f64>], start: usize) -> Vec<usize> {
    let n = dist.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    order.push(cur);
    for _ in 1..n {
        let next = (0..n)
            .filter(|&j| !visited[j])
            .min_by(|&a, &b| dist[cur][a].total_cmp(&dist[cur][b]))
            .expect("unvisited node");
        visited[next] = true;
        order.push(next);
        cur = next;
    }
    order
}

/// 2-opt for an open path: reversing `order[i..=j]` replaces edges (i-1, i) and (j, j+1).
fn two_opt(dist: &[Vec<f64>], order: &mut [usize]) {
    let n = order.len();
    if n < 3 {
        return;
    }
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let before_old = if i > 0 { dist[order[i - 1]][order[i]] } else { 0.0 };
                let after_old = if j + 1 < n { dist[order[j]][order[j + 1]] } else { 0.0 };
                let before_new = if i > 0 { dist[order[i - 1]][order[j]] } else { 0.0 };
                let after_new = if j + 1 < n { dist[order[i]][order[j + 1]] } else { 0.0 };
                if before_new + after_new < before_old + after_old - 1e-10 {
                    order[i..=j].reverse();
                    improved = true;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::graph::tests::{arcs, wp};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permutations(items, k + 1, out);
            items.swap(k, i);
        }
    }

    fn brute_force(dist: &[Vec<f64>]) -> f64 {
        let mut all = Vec::new();
        permutations(&mut (0..dist.len()).collect(), 0, &mut all);
        all.iter()
            .map(|p| tour_length(dist, p))
            .fold(f64::INFINITY, f64::min)
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> WaypointGraph {
        let wps: Vec<_> = (0..n)
            .map(|i| wp(&format!("w{i}"), rng.random_range(0.0..20.0), rng.random_range(0.0..20.0)))
            .collect();
        let mut pairs: Vec<(String, String)> = (1..n)
            .map(|i| (format!("w{}", rng.random_range(0..i)), format!("w{i}")))
            .collect();
        for _ in 0..extra {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let (a, b) = (format!("w{a}"), format!("w{b}"));
            if a != b && !pairs.iter().any(|(x, y)| (x == &a && y == &b) || (x == &b && y == &a)) {
                pairs.push((a, b));
            }
        }
        WaypointGraph::new(wps, &pairs, &[], "w0").unwrap()
    }

    #[test]
    fn two_waypoints_single_arc() {
        let g = WaypointGraph::new(
            vec![wp("a", 0.0, 0.0), wp("b", 1.0, 0.0)],
            &arcs(&[("a", "b")]),
            &[],
            "a",
        )
        .unwrap();
        let r = coverage_route(&g).unwrap();
        assert_eq!(r.arcs.len(), 1);
        assert_eq!(r.length, 1.0);
    }

    #[test]
    fn six_waypoints_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 6, 4);
            let r = coverage_route(&g).unwrap();
            let optimum = brute_force(&g.distance_matrix());
            assert!(r.length <= 1.05 * optimum + 1e-9);
            assert!((r.length - optimum).abs() < 1e-9);
            let mut seen = r.order.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..6).collect::<Vec<_>>());
            // expanded arcs are real graph arcs and chain together
            for w in r.arcs.windows(2) {
                assert_eq!(w[0].1, w[1].0);
            }
            for &(a, b) in &r.arcs {
                assert!(g.arc_length(a, b).is_some());
            }
        }
    }

    #[test]
    fn heuristic_is_close_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let g = random_graph(&mut rng, 8, 6);
            let dist = g.distance_matrix();
            let h = tour_length(&dist, &path_tsp_heuristic(&dist));
            let exact = tour_length(&dist, &path_tsp_exact(&dist));
            assert!((exact - brute_force(&dist)).abs() < 1e-9);
            assert!(h <= 1.05 * exact + 1e-9, "{h} vs {exact}");
        }
    }
}
