use super::log::{LogRow, TimeSeriesLog};
use super::tasks::build_tasks;
use super::world::{RobotMode, World};
use crate::env::Scenario;
use crate::params::Params;
use crate::Result;

/// Runs the training-data scenario: every slot for `learning.slot_seconds` of simulated
/// time with shortest-path deliveries, logging every step.
///
/// Each slot after the first opens with a short docked charge so that charging states are
/// represented in the data; the robot also docks whenever the battery falls below `b_min`.
pub fn collect_training_log(scenario: &Scenario, params: &Params, seed: u64) -> Result<TimeSeriesLog> {
    params.validate()?;
    let graph = &scenario.graph;
    let dt = params.battery.dt;
    let mut log = TimeSeriesLog::new(
        &scenario.name,
        seed,
        dt,
        graph.waypoints().iter().map(|w| w.id.clone()).collect(),
        scenario.schedule.slot_ids(),
    );
    let mut world = World::new(graph, &scenario.schedule, params, seed);
    let slot_steps = (params.learning.slot_seconds / dt).round() as usize;
    let charge_steps = (params.learning.charge_seconds / dt).round() as usize;
    let deadline_steps = (params.task.deadline / dt).round() as usize;

    for (si, slot) in scenario.schedule.slots.iter().enumerate() {
        world.enter_slot(si);
        let tasks = build_tasks(graph, si, slot, seed, params.robot.obstacle_probability)?;
        let mut next_task = 0;
        let mut charge_left = if si > 0 { charge_steps } else { 0 };
        let mut task_steps = 0;
        let mut pending_start = None;
        if charge_left > 0 {
            world.start_charging();
        }
        for _ in 0..slot_steps {
            if world.mode() == RobotMode::Charging && charge_left == 0 {
                world.stop();
            }
            if world.mode() == RobotMode::Idle {
                if world.battery() < params.task.b_min {
                    world.start_charging();
                    // dock until full
                    charge_left = ((100.0 - world.battery()) / (params.battery.k_c * dt)).ceil() as usize;
                } else {
                    let task = &tasks[next_task % tasks.len()];
                    next_task += 1;
                    let start = pending_start.take().unwrap_or(task.start);
                    if graph.nearest_waypoint(world.position()) != start
                        || world.position().distance(graph.position(start)) > 1e-9
                    {
                        world.teleport(start);
                    }
                    if let Some((path, _)) = graph.shortest_path(start, task.goal) {
                        let obstacle = task.obstacle_arc(path.len().saturating_sub(1));
                        world.follow(&path, obstacle);
                        task_steps = 0;
                    }
                }
            }
            let rec = world.step();
            if world.mode() == RobotMode::Charging {
                charge_left = charge_left.saturating_sub(1);
            }
            if rec.v > 0.0 || rec.stalled {
                task_steps += 1;
                if task_steps >= deadline_steps {
                    let next = &tasks[next_task % tasks.len()];
                    world.teleport(next.start);
                    pending_start = Some(next.start);
                }
            }
            log.rows.push(LogRow::from_step(&rec, world.waypoint_counts()));
        }
    }
    Ok(log)
}
