use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::tasks::stream_seed;
use crate::env::{Point, Slot, WaypointGraph};
use crate::params::CrowdParams;

/// Inverse-CDF draw: the first waypoint whose cumulative probability exceeds `u`.
pub fn sample_goal_with(occupancy: &[(usize, f64)], u: f64) -> usize {
    let mut cum = 0.0;
    for &(w, p) in occupancy {
        cum += p;
        if u < cum {
            return w;
        }
    }
    occupancy
        .iter()
        .rev()
        .find(|&&(_, p)| p > 0.0)
        .map(|&(w, _)| w)
        .expect("occupancy has positive mass")
}

/// Draws a worker goal for `slot` from its occupancy distribution.
pub fn sample_goal<R: Rng + ?Sized>(slot: &Slot, rng: &mut R) -> usize {
    sample_goal_with(&slot.occupancy, rng.random::<f64>())
}

/// The pre-generated sequence of (goal, dwell seconds, spot) decisions of one worker in one slot.
///
/// Depends only on `(seed, slot, worker)`, never on what the robot does.
#[derive(Debug, Clone)]
pub struct GoalStream {
    rng: ChaCha8Rng,
}

impl GoalStream {
    pub fn new(seed: u64, slot: usize, worker: usize) -> Self {
        GoalStream {
            rng: ChaCha8Rng::seed_from_u64(stream_seed(seed, 1, slot as u64, worker as u64)),
        }
    }

    /// Next goal decision of the worker.
    pub fn next_goal(&mut self, slot: &Slot, params: &CrowdParams) -> GoalDecision {
        let goal = sample_goal(slot, &mut self.rng);
        let dwell = params.dwell_min + (params.dwell_max - params.dwell_min) * self.rng.random::<f64>();
        let spot = self.disc_point(1.0);
        let lane = params.lane_min + (params.lane_max - params.lane_min) * self.rng.random::<f64>();
        GoalDecision { goal, dwell, spot, lane }
    }

    fn disc_point(&mut self, r: f64) -> Point {
        let rho = r * self.rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * self.rng.random::<f64>();
        Point::new(rho * theta.cos(), rho * theta.sin())
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalDecision {
    pub goal: usize,
    /// Seconds spent at the goal once reached.
    pub dwell: f64,
    /// Standing spot as a point of the unit disc, scaled by the goal's radius.
    pub spot: Point,
    /// Distance kept to the right of the route's centre line, m.
    pub lane: f64,
}

/// Unit normal to the right of the direction `a -> b`.
fn right_normal(a: Point, b: Point) -> Point {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return Point::new(0.0, 0.0);
    }
    Point::new(dy / len, -dx / len)
}

/// Corner points of a polyline shifted `lane` metres to its right (mitred, capped at twice
/// the offset). Endpoints are dropped: walkers leave from and head for their standing spots.
fn keep_right(centres: &[Point], lane: f64) -> Vec<Point> {
    let n = centres.len();
    (1..n.saturating_sub(1))
        .map(|k| {
            let a = right_normal(centres[k - 1], centres[k]);
            let b = right_normal(centres[k], centres[k + 1]);
            let (mx, my) = (a.x + b.x, a.y + b.y);
            let m = mx.hypot(my);
            let (ux, uy, scale) = if m < 1e-9 {
                (a.x, a.y, lane)
            } else {
                let (ux, uy) = (mx / m, my / m);
                (ux, uy, (lane / (ux * a.x + uy * a.y).max(0.5)))
            };
            Point::new(centres[k].x + ux * scale, centres[k].y + uy * scale)
        })
        .collect()
}

/// Standing spot of `decision` in world coordinates.
fn spot_position(graph: &WaypointGraph, decision: &GoalDecision) -> Point {
    let w = graph.waypoint(decision.goal);
    let r = 0.9 * w.radius;
    Point::new(w.position.x + decision.spot.x * r, w.position.y + decision.spot.y * r)
}

#[derive(Debug, Clone)]
enum Activity {
    Dwelling { until: f64 },
    Walking { route: Vec<Point>, next: usize, dwell: f64 },
}

#[derive(Debug, Clone)]
struct Worker {
    pos: Point,
    activity: Activity,
    stream: GoalStream,
    noise: ChaCha8Rng,
}

/// Kinematic waypoint-following workers.
#[derive(Debug, Clone)]
pub struct Crowd {
    params: CrowdParams,
    seed: u64,
    workers: Vec<Worker>,
    next_hop: Vec<Vec<usize>>,
}

impl Crowd {
    pub fn new(graph: &WaypointGraph, params: CrowdParams, seed: u64) -> Self {
        let n = graph.len();
        let mut next_hop = vec![vec![0; n]; n];
        for target in 0..n {
            let (_, prev) = graph.dijkstra(target);
            for u in 0..n {
                next_hop[u][target] = prev[u].unwrap_or(u);
            }
        }
        Crowd {
            params,
            seed,
            workers: Vec::new(),
            next_hop,
        }
    }

    /// Replaces the population with `slot.workers` fresh workers standing at goals drawn from
    /// the slot's distribution, with staggered remaining dwell times.
    pub fn start_slot(&mut self, graph: &WaypointGraph, slot_index: usize, slot: &Slot, clock: f64) {
        self.workers = (0..slot.workers)
            .map(|i| {
                let mut stream = GoalStream::new(self.seed, slot_index, i);
                let first = stream.next_goal(slot, &self.params);
                let remaining = first.dwell * stream.uniform();
                Worker {
                    pos: spot_position(graph, &first),
                    activity: Activity::Dwelling {
                        until: clock + remaining,
                    },
                    stream,
                    noise: ChaCha8Rng::seed_from_u64(stream_seed(self.seed, 2, slot_index as u64, i as u64)),
                }
            })
            .collect();
    }

    pub fn len(&self) -> usize {
        self.workers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.workers.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Point> + '_ {
        self.workers.iter().map(|w| w.pos)
    }

    /// Advances every worker by `dt` seconds; `clock` is the time at the end of the step.
    pub fn step(&mut self, graph: &WaypointGraph, slot: &Slot, clock: f64, dt: f64) {
        let params = self.params;
        let noise = Normal::new(0.0, params.noise_sigma.max(0.0)).expect("finite sigma");
        let bound = 3.0 * params.noise_sigma;
        for w in &mut self.workers {
            if let Activity::Dwelling { until } = w.activity {
                if clock < until {
                    continue;
                }
                let here = graph.nearest_waypoint(w.pos);
                let decision = w.stream.next_goal(slot, &params);
                let (goal, lane) = (decision.goal, decision.lane);
                let mut centres = vec![graph.position(here)];
                let mut cur = here;
                while cur != goal {
                    cur = self.next_hop[cur][goal];
                    centres.push(graph.position(cur));
                }
                let mut route = keep_right(&centres, lane);
                route.push(spot_position(graph, &decision));
                w.activity = Activity::Walking {
                    route,
                    next: 0,
                    dwell: decision.dwell,
                };
            }
            let mut budget = params.speed * dt;
            let mut arrived = None;
            if let Activity::Walking { route, next, dwell } = &mut w.activity {
                while budget > 0.0 {
                    let target = route[*next];
                    let d = w.pos.distance(target);
                    if d <= budget {
                        w.pos = target;
                        budget -= d;
                        *next += 1;
                        if *next == route.len() {
                            arrived = Some(*dwell);
                            break;
                        }
                    } else {
                        w.pos = w.pos.lerp(target, budget / d);
                        budget = 0.0;
                    }
                }
                if arrived.is_none() && params.noise_sigma > 0.0 {
                    let jx: f64 = noise.sample(&mut w.noise);
                    let jy: f64 = noise.sample(&mut w.noise);
                    w.pos.x += jx.clamp(-bound, bound);
                    w.pos.y += jy.clamp(-bound, bound);
                }
            }
            if let Some(dwell) = arrived {
                w.activity = Activity::Dwelling { until: clock + dwell };
            }
        }
    }

    /// Distance from `p` to the closest worker, or infinity with nobody present.
    pub fn nearest_distance(&self, p: Point) -> f64 {
        self.positions()
            .map(|q| q.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Workers per waypoint, assigning each worker to its nearest waypoint centre.
    pub fn waypoint_counts(&self, graph: &WaypointGraph) -> Vec<u16> {
        let mut counts = vec![0u16; graph.len()];
        for p in self.positions() {
            counts[graph.nearest_waypoint(p)] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::TaskTemplate;
    use rand::SeedableRng;

    fn slot(occupancy: Vec<(usize, f64)>) -> Slot {
        Slot {
            id: "S".into(),
            start: "08:00".into(),
            end: "09:00".into(),
            occupancy,
            task: TaskTemplate::Coverage,
            task_count: 1,
            workers: 3,
        }
    }

    #[test]
    fn degenerate_distribution() {
        let s = slot(vec![(4, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| sample_goal(&s, &mut rng) == 4));
    }

    #[test]
    fn inverse_cdf_order() {
        assert_eq!(sample_goal_with(&[(0, 0.9), (1, 0.1)], 0.95), 1);
        assert_eq!(sample_goal_with(&[(0, 0.9), (1, 0.1)], 0.5), 0);
        assert_eq!(sample_goal_with(&[(0, 0.9), (1, 0.1)], 1.0), 1);
    }

    #[test]
    fn empirical_frequencies() {
        let s = slot(vec![(0, 0.7), (1, 0.2), (2, 0.1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            counts[sample_goal(&s, &mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip([0.7, 0.2, 0.1]) {
            assert!((*c as f64 / 1e4 - p).abs() <= 0.02);
        }
    }

    #[test]
    fn goal_streams_are_reproducible() {
        let s = slot(vec![(0, 0.5), (1, 0.5)]);
        let p = CrowdParams::default();
        let mut a = GoalStream::new(9, 2, 5);
        let mut b = GoalStream::new(9, 2, 5);
        for _ in 0..50 {
            assert_eq!(a.next_goal(&s, &p), b.next_goal(&s, &p));
        }
        let mut c = GoalStream::new(9, 2, 6);
        let same = (0..50).all(|_| a.next_goal(&s, &p) == c.next_goal(&s, &p));
        assert!(!same);
    }
}
