use super::battery::{apply_battery, battery_delta};
use super::crowd::Crowd;
use super::safety::{detect_collision, CollisionTracker};
use crate::env::{Point, ScenarioSchedule, Slot, WaypointGraph};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobotMode {
    Idle,
    Charging,
    Moving,
}

#[derive(Debug, Clone)]
struct ActivePlan {
    points: Vec<Point>,
    leg: usize,
    /// Metres of straight-line progress along the current leg.
    progress: f64,
    obstacle_leg: Option<usize>,
}

impl ActivePlan {
    fn leg_length(&self) -> f64 {
        self.points[self.leg].distance(self.points[self.leg + 1])
    }

    /// Manoeuvre zone on the current leg, if it is obstructed.
    fn zone(&self, zone_len: f64) -> Option<(f64, f64)> {
        (self.obstacle_leg == Some(self.leg)).then(|| {
            let len = self.leg_length();
            let half = 0.5 * zone_len.min(len);
            (0.5 * len - half, 0.5 * len + half)
        })
    }

    fn position(&self) -> Point {
        let len = self.leg_length();
        let t = if len > 0.0 { self.progress / len } else { 1.0 };
        self.points[self.leg].lerp(self.points[self.leg + 1], t.min(1.0))
    }
}

/// What happened during one simulation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Time at the end of the step, s.
    pub t: f64,
    pub v: f64,
    pub b: f64,
    /// Battery change over the step (`b` minus the previous level).
    pub l: f64,
    pub c: bool,
    pub o: bool,
    pub slot: usize,
    pub robot_w: usize,
    /// Robot to nearest person after the step, m (infinite when nobody is present).
    pub min_person_dist: f64,
    pub new_collisions: u32,
    /// Distance driven during the step, m.
    pub travelled: f64,
    pub stalled: bool,
    pub arrived: bool,
}

/// One robot in a warehouse with a kinematic crowd. Single-threaded; owned by one runner.
#[derive(Debug, Clone)]
pub struct World<'a> {
    graph: &'a WaypointGraph,
    schedule: &'a ScenarioSchedule,
    params: &'a Params,
    crowd: Crowd,
    collisions: CollisionTracker,
    steps: u64,
    slot: usize,
    pos: Point,
    battery: f64,
    mode: RobotMode,
    plan: Option<ActivePlan>,
}

impl<'a> World<'a> {
    pub fn new(graph: &'a WaypointGraph, schedule: &'a ScenarioSchedule, params: &'a Params, seed: u64) -> Self {
        World {
            graph,
            schedule,
            params,
            crowd: Crowd::new(graph, params.crowd, seed),
            collisions: CollisionTracker::default(),
            steps: 0,
            slot: 0,
            pos: graph.position(graph.charging_station()),
            battery: 100.0,
            mode: RobotMode::Idle,
            plan: None,
        }
    }

    /// Switches to slot `index` and spawns its workers.
    pub fn enter_slot(&mut self, index: usize) {
        self.slot = index;
        let slot = &self.schedule.slots[index];
        self.crowd.start_slot(self.graph, index, slot, self.clock());
        self.collisions = CollisionTracker::new(self.crowd.len());
    }

    pub fn clock(&self) -> f64 {
        self.steps as f64 * self.params.battery.dt
    }

    pub fn slot(&self) -> &Slot {
        &self.schedule.slots[self.slot]
    }

    pub fn slot_index(&self) -> usize {
        self.slot
    }

    pub fn battery(&self) -> f64 {
        self.battery
    }

    pub fn set_battery(&mut self, b: f64) {
        self.battery = b.clamp(0.0, 100.0);
    }

    pub fn position(&self) -> Point {
        self.pos
    }

    pub fn mode(&self) -> RobotMode {
        self.mode
    }

    pub fn crowd(&self) -> &Crowd {
        &self.crowd
    }

    pub fn collision_events(&self) -> u64 {
        self.collisions.events()
    }

    /// Moves the robot instantly to a waypoint and drops any plan.
    pub fn teleport(&mut self, waypoint: usize) {
        self.pos = self.graph.position(waypoint);
        self.plan = None;
        self.mode = RobotMode::Idle;
    }

    /// Docks at the charging station.
    pub fn start_charging(&mut self) {
        self.teleport(self.graph.charging_station());
        self.mode = RobotMode::Charging;
    }

    pub fn stop(&mut self) {
        self.plan = None;
        self.mode = RobotMode::Idle;
    }

    /// Starts driving along `path` (waypoint indices); arc `obstacle_arc` carries an obstacle.
    pub fn follow(&mut self, path: &[usize], obstacle_arc: Option<usize>) {
        if path.len() < 2 {
            self.stop();
            if let Some(&w) = path.first() {
                self.pos = self.graph.position(w);
            }
            return;
        }
        let mut points = Vec::with_capacity(path.len() + 1);
        points.push(self.pos);
        points.extend(path.iter().skip(1).map(|&w| self.graph.position(w)));
        // robot starts at (or near) path[0]; the first leg runs from the current position
        self.plan = Some(ActivePlan {
            points,
            leg: 0,
            progress: 0.0,
            obstacle_leg: obstacle_arc,
        });
        self.mode = RobotMode::Moving;
    }

    /// Advances the world by one step.
    pub fn step(&mut self) -> StepRecord {
        let dt = self.params.battery.dt;
        let robot = &self.params.robot;
        self.steps += 1;
        let t = self.clock();
        let slot = &self.schedule.slots[self.slot];
        self.crowd.step(self.graph, slot, t, dt);

        let charging = self.mode == RobotMode::Charging;
        let mut obstacle = false;
        let mut stalled = false;
        let mut speed = 0.0;
        if let (RobotMode::Moving, Some(plan)) = (self.mode, &self.plan) {
            obstacle = plan.obstacle_leg == Some(plan.leg);
            if self.crowd.nearest_distance(self.pos) < robot.stall_radius {
                stalled = true;
            } else {
                let in_zone = plan
                    .zone(robot.obstacle_zone)
                    .is_some_and(|(a, b)| plan.progress >= a && plan.progress < b);
                speed = if in_zone {
                    robot.v_max * robot.obstacle_speed_factor
                } else {
                    robot.v_max
                };
            }
        }
        let (travelled, arrived) = self.advance(speed * dt);

        let b_prev = self.battery;
        self.battery = apply_battery(b_prev, battery_delta(speed, charging, obstacle, &self.params.battery));

        let mut new_collisions = 0;
        let mut min_person_dist = f64::INFINITY;
        for (i, p) in self.crowd.positions().enumerate() {
            let d = p.distance(self.pos);
            min_person_dist = min_person_dist.min(d);
            if self.collisions.observe(i, detect_collision(self.pos, p, robot.collision_radius)) {
                new_collisions += 1;
            }
        }

        StepRecord {
            t,
            v: speed,
            b: self.battery,
            l: self.battery - b_prev,
            c: charging,
            o: obstacle,
            slot: self.slot,
            robot_w: self.graph.nearest_waypoint(self.pos),
            min_person_dist,
            new_collisions,
            travelled,
            stalled,
            arrived,
        }
    }

    /// Drives `budget` metres along the plan. Returns (distance driven, arrived).
    fn advance(&mut self, budget: f64) -> (f64, bool) {
        let Some(plan) = self.plan.as_mut() else {
            return (0.0, false);
        };
        let zone_len = self.params.robot.obstacle_zone;
        let detour = self.params.robot.obstacle_detour_factor;
        let mut budget = budget;
        let mut travelled = 0.0;
        let mut arrived = false;
        while budget > 1e-12 {
            let len = plan.leg_length();
            let (cost, boundary) = match plan.zone(zone_len) {
                Some((a, _)) if plan.progress < a => (1.0, a),
                Some((_, b)) if plan.progress < b => (detour, b),
                _ => (1.0, len),
            };
            let room = boundary - plan.progress;
            let step = (budget / cost).min(room);
            plan.progress += step;
            budget -= step * cost;
            travelled += step * cost;
            if plan.progress >= len - 1e-12 {
                if plan.leg + 2 == plan.points.len() {
                    arrived = true;
                    plan.progress = len;
                    break;
                }
                plan.leg += 1;
                plan.progress = 0.0;
            }
        }
        self.pos = plan.position();
        if arrived {
            self.plan = None;
            self.mode = RobotMode::Idle;
        }
        (travelled, arrived)
    }

    /// Workers per waypoint (nearest-centre assignment).
    pub fn waypoint_counts(&self) -> Vec<u16> {
        self.crowd.waypoint_counts(self.graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Scenario;

    const LINE: &str = r#"
name = "line"
population = 0
arcs = [["a", "b"], ["b", "c"]]

[stations]
goals = ["a", "c"]
charging = "a"

[[waypoints]]
id = "a"
x = 0.0
y = 0.0
radius = 1.0
label = "corridor"

[[waypoints]]
id = "b"
x = 10.0
y = 0.0
radius = 1.0
label = "corridor"

[[waypoints]]
id = "c"
x = 20.0
y = 0.0
radius = 1.0
label = "corridor"

[[slots]]
id = "S1"
start = "08:00"
end = "09:00"
task_count = 1
task = { kind = "pick_and_place", from = ["a"], to = ["c"] }
occupancy = { b = 1.0 }
"#;

    #[test]
    fn straight_run_matches_kinematics() {
        let sc = Scenario::parse(LINE).unwrap();
        let params = Params::default();
        let mut world = World::new(&sc.graph, &sc.schedule, &params, 1);
        world.enter_slot(0);
        world.follow(&[0, 1, 2], None);
        let mut b = 100.0;
        for k in 1..=100 {
            let r = world.step();
            assert!((world.position().x - 0.05 * k as f64).abs() < 1e-9);
            b += -params.battery.dt * (params.battery.k_s + params.battery.k_d * 0.5);
            assert!((r.b - b).abs() < 1e-9);
            assert!(!r.o && !r.stalled);
        }
    }

    #[test]
    fn arrives_and_stops() {
        let sc = Scenario::parse(LINE).unwrap();
        let params = Params::default();
        let mut world = World::new(&sc.graph, &sc.schedule, &params, 1);
        world.enter_slot(0);
        world.follow(&[0, 1], None);
        let mut steps = 0;
        loop {
            steps += 1;
            if world.step().arrived {
                break;
            }
        }
        assert_eq!(steps, 200);
        assert_eq!(world.mode(), RobotMode::Idle);
        assert_eq!(world.step().v, 0.0);
    }

    #[test]
    fn obstacle_scales_drain_and_lengthens_travel() {
        let sc = Scenario::parse(LINE).unwrap();
        let params = Params::default();
        let mut world = World::new(&sc.graph, &sc.schedule, &params, 1);
        world.enter_slot(0);
        world.follow(&[0, 1], Some(0));
        let first = world.step();
        assert!(first.o);
        let free = -params.battery.dt * (params.battery.k_s + params.battery.k_d * first.v);
        assert!((first.l - params.battery.k_o * free).abs() < 1e-12);
        let mut travelled = first.travelled;
        loop {
            let r = world.step();
            travelled += r.travelled;
            if r.arrived {
                break;
            }
        }
        let extra = params.robot.obstacle_zone * (params.robot.obstacle_detour_factor - 1.0);
        assert!((travelled - (10.0 + extra)).abs() < 1e-6, "{travelled}");
    }

    #[test]
    fn charging_has_zero_speed() {
        let sc = Scenario::parse(LINE).unwrap();
        let params = Params::default();
        let mut world = World::new(&sc.graph, &sc.schedule, &params, 1);
        world.enter_slot(0);
        world.set_battery(50.0);
        world.start_charging();
        let r = world.step();
        assert!(r.c);
        assert_eq!(r.v, 0.0);
        assert!((r.l - params.battery.dt * params.battery.k_c).abs() < 1e-12);
    }
}
