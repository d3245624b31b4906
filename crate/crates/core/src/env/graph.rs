use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Point a fraction `t` of the way from `self` to `other`.
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    Office,
    Canteen,
    Shelf,
    Corridor,
    Entrance,
    Toilet,
    Charging,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint {
    pub id: String,
    pub position: Point,
    /// Radius of the circular area the waypoint stands for, in metres.
    pub radius: f64,
    pub label: RegionLabel,
}

/// Euclidean distance between two waypoints in metres.
pub fn pairwise_distance(a: &Waypoint, b: &Waypoint) -> f64 {
    a.position.distance(b.position)
}

/// Undirected arc between waypoint indices `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct WaypointGraph {
    waypoints: Vec<Waypoint>,
    index: HashMap<String, usize>,
    arcs: Vec<Arc>,
    adjacency: Vec<Vec<(usize, f64)>>,
    goal_stations: Vec<usize>,
    charging_station: usize,
}

impl WaypointGraph {
    /// Builds and validates a graph. Arc lengths are the Euclidean distances between endpoints.
    pub fn new(
        waypoints: Vec<Waypoint>,
        arcs: &[(String, String)],
        goal_stations: &[String],
        charging_station: &str,
    ) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::invalid("waypoints", "at least one waypoint is required"));
        }
        let mut index = HashMap::with_capacity(waypoints.len());
        for (i, w) in waypoints.iter().enumerate() {
            if w.id.is_empty() {
                return Err(Error::invalid(format!("waypoints[{i}].id"), "empty id"));
            }
            if !w.position.is_finite() {
                return Err(Error::invalid(format!("waypoints[{i}]"), "non-finite position"));
            }
            if !(w.radius > 0.0 && w.radius.is_finite()) {
                return Err(Error::invalid(
                    format!("waypoints[{i}].radius"),
                    format!("radius must be positive, got {}", w.radius),
                ));
            }
            if index.insert(w.id.clone(), i).is_some() {
                return Err(Error::invalid(
                    format!("waypoints[{i}].id"),
                    format!("duplicate id '{}'", w.id),
                ));
            }
        }

        let lookup = |path: String, id: &str| -> Result<usize> {
            index.get(id).copied().ok_or_else(|| {
                Error::invalid(path, format!("unknown waypoint '{id}'"))
            })
        };

        let mut adjacency = vec![Vec::new(); waypoints.len()];
        let mut out_arcs = Vec::with_capacity(arcs.len());
        for (k, (a, b)) in arcs.iter().enumerate() {
            let ia = lookup(format!("arcs[{k}][0]"), a)?;
            let ib = lookup(format!("arcs[{k}][1]"), b)?;
            if ia == ib {
                return Err(Error::invalid(format!("arcs[{k}]"), format!("self-arc on '{a}'")));
            }
            let (lo, hi) = if ia < ib { (ia, ib) } else { (ib, ia) };
            if adjacency[lo].iter().any(|&(n, _)| n == hi) {
                return Err(Error::invalid(
                    format!("arcs[{k}]"),
                    format!("duplicate arc '{a}'-'{b}'"),
                ));
            }
            let length = pairwise_distance(&waypoints[lo], &waypoints[hi]);
            if length <= 0.0 {
                return Err(Error::invalid(
                    format!("arcs[{k}]"),
                    format!("'{a}' and '{b}' share a position"),
                ));
            }
            adjacency[lo].push((hi, length));
            adjacency[hi].push((lo, length));
            out_arcs.push(Arc { a: lo, b: hi, length });
        }
        for list in &mut adjacency {
            list.sort_by(|x, y| waypoints[x.0].id.cmp(&waypoints[y.0].id));
        }

        let goal_stations = goal_stations
            .iter()
            .enumerate()
            .map(|(k, g)| lookup(format!("stations.goals[{k}]"), g))
            .collect::<Result<Vec<_>>>()?;
        let charging_station = lookup("stations.charging".to_string(), charging_station)?;

        let graph = WaypointGraph {
            waypoints,
            index,
            arcs: out_arcs,
            adjacency,
            goal_stations,
            charging_station,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(Error::Disconnected(
                self.waypoints[i].id.clone(),
                self.waypoints[0].id.clone(),
            )),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn waypoint(&self, i: usize) -> &Waypoint {
        &self.waypoints[i]
    }

    pub fn id(&self, i: usize) -> &str {
        &self.waypoints[i].id
    }

    pub fn position(&self, i: usize) -> Point {
        self.waypoints[i].position
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownWaypoint(id.to_string()))
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Neighbours of `i` with arc lengths, ordered by neighbour id.
    pub fn neighbours(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn arc_length(&self, a: usize, b: usize) -> Option<f64> {
        self.adjacency[a]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, l)| l)
    }

    pub fn goal_stations(&self) -> &[usize] {
        &self.goal_stations
    }

    pub fn charging_station(&self) -> usize {
        self.charging_station
    }

    /// Index of the waypoint whose centre is closest to `p` (ties go to the lower index).
    pub fn nearest_waypoint(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, w) in self.waypoints.iter().enumerate() {
            let d = (w.position.x - p.x).powi(2) + (w.position.y - p.y).powi(2);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Metric shortest-path distances and predecessor tree from `source`.
    pub fn dijkstra(&self, source: usize) -> (Vec<f64>, Vec<Option<usize>>) {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(MinEntry(0.0, source));
        while let Some(MinEntry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] - 1e-12 {
                    dist[v] = nd;
                    prev[v] = Some(u);
                    heap.push(MinEntry(nd, v));
                }
            }
        }
        (dist, prev)
    }

    /// Shortest metric path as a waypoint sequence, with its length.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<(Vec<usize>, f64)> {
        let (dist, prev) = self.dijkstra(from);
        if !dist[to].is_finite() {
            return None;
        }
        let mut path = vec![to];
        let mut cur = to;
        while let Some(p) = prev[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some((path, dist[to]))
    }

    /// All-pairs metric distances.
    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|s| self.dijkstra(s).0).collect()
    }

    /// The subgraph induced by `keep` (indices into this graph), which must be connected.
    /// Goal stations outside `keep` are dropped; the charging station falls back to the first
    /// kept waypoint when it is not retained.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Result<WaypointGraph> {
        let waypoints: Vec<Waypoint> = keep.iter().map(|&i| self.waypoints[i].clone()).collect();
        let kept: HashMap<usize, ()> = keep.iter().map(|&i| (i, ())).collect();
        let arcs: Vec<(String, String)> = self
            .arcs
            .iter()
            .filter(|a| kept.contains_key(&a.a) && kept.contains_key(&a.b))
            .map(|a| (self.id(a.a).to_string(), self.id(a.b).to_string()))
            .collect();
        let goals: Vec<String> = self
            .goal_stations
            .iter()
            .filter(|g| kept.contains_key(g))
            .map(|&g| self.id(g).to_string())
            .collect();
        let charging = if kept.contains_key(&self.charging_station) {
            self.id(self.charging_station).to_string()
        } else {
            self.id(keep[0]).to_string()
        };
        WaypointGraph::new(waypoints, &arcs, &goals, &charging)
    }

    /// First `n` waypoints in breadth-first order from `root`; always a connected set.
    pub fn bfs_prefix(&self, root: usize, n: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut order = Vec::with_capacity(n);
        let mut queue = std::collections::VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            if order.len() == n {
                break;
            }
            order.push(u);
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct MinEntry(f64, usize);

impl Eq for MinEntry {}

impl Ord for MinEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for MinEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn wp(id: &str, x: f64, y: f64) -> Waypoint {
        Waypoint {
            id: id.to_string(),
            position: Point::new(x, y),
            radius: 1.0,
            label: RegionLabel::Corridor,
        }
    }

    pub(crate) fn arcs(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn three_four_five() {
        assert_eq!(pairwise_distance(&wp("a", 0.0, 0.0), &wp("b", 3.0, 4.0)), 5.0);
        assert_eq!(pairwise_distance(&wp("a", 1.0, 1.0), &wp("b", 1.0, 1.0)), 0.0);
    }

    proptest! {
        #[test]
        fn distance_is_symmetric(ax in -1e3..1e3f64, ay in -1e3..1e3f64, bx in -1e3..1e3f64, by in -1e3..1e3f64) {
            let a = wp("a", ax, ay);
            let b = wp("b", bx, by);
            prop_assert!((pairwise_distance(&a, &b) - pairwise_distance(&b, &a)).abs() <= 1e-12);
            prop_assert!(pairwise_distance(&a, &b) >= 0.0);
        }
    }

    #[test]
    fn arc_lengths_match_positions() {
        let g = WaypointGraph::new(
            vec![wp("a", 0.0, 0.0), wp("b", 3.0, 4.0), wp("c", 3.0, 0.0)],
            &arcs(&[("a", "b"), ("b", "c")]),
            &["a".into()],
            "c",
        )
        .unwrap();
        for arc in g.arcs() {
            let d = g.position(arc.a).distance(g.position(arc.b));
            assert!((arc.length - d).abs() < 1e-9);
        }
        assert_eq!(g.arc_length(0, 1), Some(5.0));
        assert_eq!(g.arc_length(0, 2), None);
    }

    #[test]
    fn rejects_disconnected_graphs() {
        let err = WaypointGraph::new(
            vec![wp("a", 0.0, 0.0), wp("b", 1.0, 0.0), wp("c", 2.0, 0.0)],
            &arcs(&[("a", "b")]),
            &[],
            "a",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Disconnected(ref w, _) if w == "c"));
    }

    #[test]
    fn rejects_self_arcs_and_bad_radius() {
        let err = WaypointGraph::new(
            vec![wp("a", 0.0, 0.0), wp("b", 1.0, 0.0)],
            &arcs(&[("a", "a")]),
            &[],
            "a",
        )
        .unwrap_err();
        assert!(err.to_string().contains("self-arc"));

        let mut w = wp("a", 0.0, 0.0);
        w.radius = 0.0;
        let err = WaypointGraph::new(vec![w], &[], &[], "a").unwrap_err();
        assert!(err.to_string().contains("waypoints[0].radius"));
    }

    #[test]
    fn shortest_path_prefers_metric_length() {
        let g = WaypointGraph::new(
            vec![
                wp("a", 0.0, 0.0),
                wp("b", 1.0, 1.0),
                wp("c", 2.0, 0.0),
                wp("d", 1.0, -3.0),
            ],
            &arcs(&[("a", "b"), ("b", "c"), ("a", "d"), ("d", "c")]),
            &[],
            "a",
        )
        .unwrap();
        let (path, len) = g.shortest_path(0, 2).unwrap();
        assert_eq!(path, vec![0, 1, 2]);
        assert!((len - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bfs_prefix_is_connected() {
        let g = WaypointGraph::new(
            vec![wp("a", 0.0, 0.0), wp("b", 1.0, 0.0), wp("c", 2.0, 0.0), wp("d", 3.0, 0.0)],
            &arcs(&[("a", "b"), ("b", "c"), ("c", "d")]),
            &["d".into()],
            "a",
        )
        .unwrap();
        let keep = g.bfs_prefix(0, 3);
        let sub = g.induced_subgraph(&keep).unwrap();
        assert_eq!(sub.len(), 3);
        assert!(sub.goal_stations().is_empty());
    }
}
