use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{coverage_route, Slot, TaskTemplate, WaypointGraph};
use crate::Result;

/// Derives an independent stream seed from a base seed and three tags (splitmix64 mixing).
pub fn stream_seed(seed: u64, tag: u64, a: u64, b: u64) -> u64 {
    let mut z = seed;
    for v in [tag, a, b] {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(v.wrapping_mul(0xBF58_476D_1CE4_E5B9));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// One robot task; everything random about it is drawn up front so that every planner
/// configuration faces the same task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSpec {
    pub id: usize,
    pub slot: usize,
    pub start: usize,
    pub goal: usize,
    /// `Some(u)` when an obstacle appears; it sits on arc `floor(u * arcs)` of the executed plan.
    pub obstacle: Option<f64>,
}

impl TaskSpec {
    /// Index of the obstructed arc for a plan with `arcs` arcs.
    pub fn obstacle_arc(&self, arcs: usize) -> Option<usize> {
        if arcs == 0 {
            return None;
        }
        self.obstacle
            .map(|u| ((u * arcs as f64).floor() as usize).min(arcs - 1))
    }
}

/// The task list of a slot for a given seed.
pub fn build_tasks(
    graph: &WaypointGraph,
    slot_index: usize,
    slot: &Slot,
    seed: u64,
    obstacle_probability: f64,
) -> Result<Vec<TaskSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, 3, slot_index as u64, 0));
    let legs: Vec<(usize, usize)> = match &slot.task {
        TaskTemplate::PickAndPlace { from, to } => {
            let mut cur = from[rng.random_range(0..from.len())];
            let mut legs = Vec::with_capacity(slot.task_count);
            for k in 0..slot.task_count {
                let pool = if k % 2 == 0 { to } else { from };
                let mut next = pool[rng.random_range(0..pool.len())];
                for _ in 0..16 {
                    if next != cur {
                        break;
                    }
                    next = pool[rng.random_range(0..pool.len())];
                }
                legs.push((cur, next));
                cur = next;
            }
            legs
        }
        TaskTemplate::Coverage => {
            let route = coverage_route(graph)?;
            let mut legs = Vec::with_capacity(slot.task_count);
            let mut forward = true;
            while legs.len() < slot.task_count && !route.arcs.is_empty() {
                if forward {
                    legs.extend(route.arcs.iter().copied());
                } else {
                    legs.extend(route.arcs.iter().rev().map(|&(a, b)| (b, a)));
                }
                forward = !forward;
            }
            legs.truncate(slot.task_count);
            legs
        }
    };
    Ok(legs
        .into_iter()
        .enumerate()
        .map(|(id, (start, goal))| {
            let has_obstacle = rng.random::<f64>() < obstacle_probability;
            let u = rng.random::<f64>();
            TaskSpec {
                id,
                slot: slot_index,
                start,
                goal,
                obstacle: has_obstacle.then_some(u),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(stream_seed(1, 2, 3, 4), stream_seed(1, 2, 3, 4));
        assert_ne!(stream_seed(1, 2, 3, 4), stream_seed(1, 2, 4, 3));
        assert_ne!(stream_seed(0, 0, 0, 0), stream_seed(1, 0, 0, 0));
    }

    #[test]
    fn obstacle_arc_index_is_in_range() {
        let t = TaskSpec {
            id: 0,
            slot: 0,
            start: 0,
            goal: 1,
            obstacle: Some(0.999_999),
        };
        assert_eq!(t.obstacle_arc(4), Some(3));
        assert_eq!(t.obstacle_arc(0), None);
    }
}
