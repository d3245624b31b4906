use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::approach::{ApproachConfig, Routing};
use crate::env::Scenario;
use crate::inference::CausalInferenceModel;
use crate::params::Params;
use crate::planner::{decide_task, estimate_arcs, plan_path, Decision, Estimates};
use crate::sim::{build_tasks, World};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Success,
    /// Deadline exceeded.
    #[serde(rename = "failure_D")]
    FailureD,
    /// Battery fell below the threshold mid-task.
    #[serde(rename = "failure_L")]
    FailureL,
    Refused,
}

impl TaskStatus {
    pub fn name(self) -> &'static str {
        match self {
            TaskStatus::Success => "success",
            TaskStatus::FailureD => "failure_D",
            TaskStatus::FailureL => "failure_L",
            TaskStatus::Refused => "refused",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [TaskStatus::Success, TaskStatus::FailureD, TaskStatus::FailureL, TaskStatus::Refused]
            .into_iter()
            .find(|t| t.name() == s)
    }

    pub fn is_failure(self) -> bool {
        matches!(self, TaskStatus::FailureD | TaskStatus::FailureL)
    }
}

/// Everything recorded about one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutcome {
    pub task: usize,
    pub slot: String,
    pub start: String,
    pub goal: String,
    pub status: TaskStatus,
    /// Time spent moving, s.
    pub active_s: f64,
    /// Time spent stalled by nearby people, s.
    pub stalled_s: f64,
    /// Part of the driven distance covered by the plan's length, m.
    pub planned_m: f64,
    /// Driven distance beyond the plan's length (detours), m.
    pub extra_m: f64,
    /// Battery consumed during the task, %.
    pub battery_pct: f64,
    pub battery_start: f64,
    pub collisions: u32,
    /// Closest approach to any person, m (infinite with nobody present).
    pub min_person_dist: f64,
    /// Robot-to-nearest-person distance sampled once per second.
    pub proxemics: Vec<f64>,
    pub path: Vec<String>,
    /// Planned length, m.
    pub plan_length: f64,
    /// Predicted battery use, %.
    pub c_l: f64,
    pub expansions: usize,
    /// Wall-clock planning time (queries plus search), s. Not reproducible.
    pub query_s: f64,
}

impl TaskOutcome {
    pub fn elapsed_s(&self) -> f64 {
        self.active_s + self.stalled_s
    }

    pub fn travelled_m(&self) -> f64 {
        self.planned_m + self.extra_m
    }
}

/// Outcomes of one (approach, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub approach: String,
    pub seed: u64,
    pub outcomes: Vec<TaskOutcome>,
    /// Battery drained over every simulated step of the run, %.
    pub consumption_pct: f64,
}

/// Executes every slot's task list with one approach.
///
/// Slots last until their task list is done. Per task: move to the start, plan, decide (when
/// refusal is on), then drive until arrival, the deadline, or the battery threshold. A
/// battery breach mid-task or a refusal resets the battery to 100 %; so does finishing a task
/// below the threshold.
pub fn run_experiment(
    scenario: &Scenario,
    approach: &ApproachConfig,
    model: Option<&CausalInferenceModel>,
    params: &Params,
    seed: u64,
) -> Result<RunResult> {
    params.validate()?;
    approach.weights.validate()?;
    let graph = &scenario.graph;
    let dt = params.battery.dt;
    let deadline_steps = (params.task.deadline / dt).round() as u64;
    let sample_every = (1.0 / dt).round().max(1.0) as u64;
    let b_min = approach.policy.b_min;
    let v = approach.policy.query_velocity;

    let mut world = World::new(graph, &scenario.schedule, params, seed);
    let mut outcomes = Vec::new();
    let mut consumption = 0.0;

    for (si, slot) in scenario.schedule.slots.iter().enumerate() {
        world.enter_slot(si);
        let tasks = build_tasks(graph, si, slot, seed, params.robot.obstacle_probability)?;
        for task in &tasks {
            if world.position().distance(graph.position(task.start)) > 1e-9 {
                world.teleport(task.start);
            }
            let clock = Instant::now();
            let estimates = match (approach.needs_model(), model) {
                (true, Some(m)) => estimate_arcs(graph, m, &slot.id, false, v)?,
                (true, None) => {
                    return Err(crate::Error::invalid("model", format!("approach '{}' needs a fitted model", approach.name)))
                }
                (false, _) => Estimates::flat(graph, 0.0, 0.0, v),
            };
            let weights = match approach.routing {
                Routing::Shortest => crate::planner::HeuristicWeights::shortest(),
                Routing::Causal => approach.weights,
            };
            let plan = plan_path(graph, task.start, task.goal, &estimates, &weights)?;
            let query_s = clock.elapsed().as_secs_f64();

            let battery_start = world.battery();
            let mut out = TaskOutcome {
                task: task.id,
                slot: slot.id.clone(),
                start: graph.id(task.start).to_string(),
                goal: graph.id(task.goal).to_string(),
                status: TaskStatus::Success,
                active_s: 0.0,
                stalled_s: 0.0,
                planned_m: 0.0,
                extra_m: 0.0,
                battery_pct: 0.0,
                battery_start,
                collisions: 0,
                min_person_dist: f64::INFINITY,
                proxemics: Vec::new(),
                path: plan.path.iter().map(|&w| graph.id(w).to_string()).collect(),
                plan_length: plan.length,
                c_l: plan.c_l,
                expansions: plan.expansions,
                query_s,
            };

            if approach.refusal && decide_task(&plan, battery_start, &approach.policy) == Decision::Abort {
                log::debug!("{} seed {seed}: refused task {} in {}", approach.name, task.id, slot.id);
                out.status = TaskStatus::Refused;
                world.set_battery(100.0);
                outcomes.push(out);
                continue;
            }

            let arcs = plan.path.len().saturating_sub(1);
            world.follow(&plan.path, task.obstacle_arc(arcs));
            let mut travelled = 0.0;
            let mut steps = 0u64;
            if arcs > 0 {
                loop {
                    let rec = world.step();
                    steps += 1;
                    consumption -= rec.l;
                    out.battery_pct -= rec.l;
                    travelled += rec.travelled;
                    if rec.stalled {
                        out.stalled_s += dt;
                    } else {
                        out.active_s += dt;
                    }
                    out.collisions += rec.new_collisions;
                    out.min_person_dist = out.min_person_dist.min(rec.min_person_dist);
                    if steps % sample_every == 0 && rec.min_person_dist.is_finite() {
                        out.proxemics.push(rec.min_person_dist);
                    }
                    if rec.arrived {
                        break;
                    }
                    if world.battery() < b_min {
                        out.status = TaskStatus::FailureL;
                        break;
                    }
                    if steps >= deadline_steps {
                        out.status = TaskStatus::FailureD;
                        break;
                    }
                }
            }
            match out.status {
                TaskStatus::FailureL => {
                    world.stop();
                    world.set_battery(100.0);
                }
                TaskStatus::FailureD => world.stop(),
                _ => {
                    if world.battery() < b_min {
                        world.set_battery(100.0);
                    }
                }
            }
            out.planned_m = travelled.min(plan.length);
            out.extra_m = (travelled - out.planned_m).max(0.0);
            outcomes.push(out);
        }
    }
    Ok(RunResult {
        approach: approach.name.clone(),
        seed,
        outcomes,
        consumption_pct: consumption,
    })
}

/// Runs every (approach, seed) pair, using up to `available_parallelism` threads. Results come
/// back in input order (approach-major).
pub fn run_all(
    scenario: &Scenario,
    approaches: &[ApproachConfig],
    model: Option<&CausalInferenceModel>,
    params: &Params,
    seeds: &[u64],
) -> Result<Vec<RunResult>> {
    let jobs: Vec<(&ApproachConfig, u64)> = approaches.iter().flat_map(|a| seeds.iter().map(move |&s| (a, s))).collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len()).max(1);
    if threads == 1 {
        return jobs.iter().map(|(a, s)| run_experiment(scenario, a, model, params, *s)).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<RunResult>>> = (0..jobs.len()).map(|_| None).collect();
    let done = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some((a, s)) = jobs.get(i) else { break };
                let r = run_experiment(scenario, a, model, params, *s);
                done.lock().expect("no poisoned workers")[i] = Some(r);
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every job ran")).collect()
}
