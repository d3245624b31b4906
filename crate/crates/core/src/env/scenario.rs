use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::graph::{Point, RegionLabel, Waypoint, WaypointGraph};
use crate::{Error, Result};

/// What the robot does during a time-slot.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskTemplate {
    /// Alternating deliveries: each task ends at a station drawn from the opposite set.
    PickAndPlace { from: Vec<usize>, to: Vec<usize> },
    /// Visit every waypoint; each arc of the coverage route is one task.
    Coverage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub id: String,
    pub start: String,
    pub end: String,
    /// Worker goal distribution, ordered by waypoint id. Probabilities sum to 1.
    pub occupancy: Vec<(usize, f64)>,
    pub task: TaskTemplate,
    pub task_count: usize,
    /// Workers present during the slot.
    pub workers: usize,
}

impl Slot {
    /// Wall-clock length of the slot in seconds.
    pub fn duration_s(&self) -> f64 {
        let s = parse_clock(&self.start).unwrap_or(0);
        let mut e = parse_clock(&self.end).unwrap_or(s + 3600);
        if e <= s {
            e += 24 * 3600;
        }
        (e - s) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSchedule {
    pub slots: Vec<Slot>,
}

impl ScenarioSchedule {
    pub fn slot_index(&self, id: &str) -> Result<usize> {
        self.slots
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::UnknownSlot(id.to_string()))
    }

    pub fn slot_ids(&self) -> Vec<String> {
        self.slots.iter().map(|s| s.id.clone()).collect()
    }
}

/// A loaded scenario document.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub population: usize,
    pub graph: WaypointGraph,
    pub schedule: ScenarioSchedule,
}

/// Names of the scenario documents compiled into the library.
pub const BUNDLED_SCENARIOS: [&str; 2] = ["desk20", "warehouse73"];

/// Text of a bundled scenario document.
pub fn bundled_scenario_text(name: &str) -> Option<&'static str> {
    match name {
        "desk20" => Some(include_str!("../../scenarios/desk20.toml")),
        "warehouse73" => Some(include_str!("../../scenarios/warehouse73.toml")),
        _ => None,
    }
}

/// Loads a bundled scenario by name.
pub fn bundled_scenario(name: &str) -> Result<Scenario> {
    let text = bundled_scenario_text(name).ok_or_else(|| Error::invalid("scenario", format!("no bundled scenario '{name}'")))?;
    Scenario::parse(text)
}

/// Parses a scenario document into a validated graph and schedule.
pub fn load_scenario(config_text: &str) -> Result<(WaypointGraph, ScenarioSchedule)> {
    let s = Scenario::parse(config_text)?;
    Ok((s.graph, s.schedule))
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    name: String,
    population: usize,
    arcs: Vec<(String, String)>,
    stations: StationsDoc,
    waypoints: Vec<WaypointDoc>,
    slots: Vec<SlotDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct StationsDoc {
    goals: Vec<String>,
    charging: String,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct WaypointDoc {
    id: String,
    x: f64,
    y: f64,
    radius: f64,
    label: RegionLabel,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SlotDoc {
    id: String,
    start: String,
    end: String,
    task_count: usize,
    #[serde(default)]
    workers: Option<usize>,
    task: TaskDoc,
    occupancy: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TaskDoc {
    PickAndPlace { from: Vec<String>, to: Vec<String> },
    Coverage,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let doc: ScenarioDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let waypoints = doc
            .waypoints
            .iter()
            .map(|w| Waypoint {
                id: w.id.clone(),
                position: Point::new(w.x, w.y),
                radius: w.radius,
                label: w.label,
            })
            .collect();
        let graph = WaypointGraph::new(waypoints, &doc.arcs, &doc.stations.goals, &doc.stations.charging)?;

        if doc.slots.is_empty() {
            return Err(Error::invalid("slots", "at least one slot is required"));
        }
        let mut seen = HashSet::new();
        let mut slots = Vec::with_capacity(doc.slots.len());
        for (k, s) in doc.slots.iter().enumerate() {
            let path = format!("slots[{k}]");
            if !seen.insert(s.id.clone()) {
                return Err(Error::invalid(format!("{path}.id"), format!("duplicate slot id '{}'", s.id)));
            }
            for (field, value) in [("start", &s.start), ("end", &s.end)] {
                if parse_clock(value).is_none() {
                    return Err(Error::invalid(
                        format!("{path}.{field}"),
                        format!("expected HH:MM, got '{value}'"),
                    ));
                }
            }
            if s.task_count == 0 {
                return Err(Error::invalid(format!("{path}.task_count"), "must be positive"));
            }
            let mut occupancy = Vec::with_capacity(s.occupancy.len());
            let mut total = 0.0;
            for (id, &p) in &s.occupancy {
                let i = graph.index_of(id).ok_or_else(|| {
                    Error::invalid(format!("{path}.occupancy.{id}"), format!("unknown waypoint '{id}'"))
                })?;
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::invalid(
                        format!("{path}.occupancy.{id}"),
                        format!("probability must be non-negative, got {p}"),
                    ));
                }
                total += p;
                occupancy.push((i, p));
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(
                    format!("{path}.occupancy"),
                    format!("probabilities sum to {total}, expected 1"),
                ));
            }
            let resolve = |field: &str, ids: &[String]| -> Result<Vec<usize>> {
                if ids.is_empty() {
                    return Err(Error::invalid(format!("{path}.task.{field}"), "empty station list"));
                }
                ids.iter()
                    .enumerate()
                    .map(|(j, id)| {
                        graph.index_of(id).ok_or_else(|| {
                            Error::invalid(
                                format!("{path}.task.{field}[{j}]"),
                                format!("unknown waypoint '{id}'"),
                            )
                        })
                    })
                    .collect()
            };
            let task = match &s.task {
                TaskDoc::PickAndPlace { from, to } => TaskTemplate::PickAndPlace {
                    from: resolve("from", from)?,
                    to: resolve("to", to)?,
                },
                TaskDoc::Coverage => TaskTemplate::Coverage,
            };
            slots.push(Slot {
                id: s.id.clone(),
                start: s.start.clone(),
                end: s.end.clone(),
                occupancy,
                task,
                task_count: s.task_count,
                workers: s.workers.unwrap_or(doc.population),
            });
        }

        Ok(Scenario {
            name: doc.name,
            population: doc.population,
            graph,
            schedule: ScenarioSchedule { slots },
        })
    }

    /// The same scenario restricted to a single slot.
    pub fn only_slot(&self, id: &str) -> Result<Scenario> {
        let k = self.schedule.slot_index(id)?;
        Ok(Scenario {
            name: self.name.clone(),
            population: self.population,
            graph: self.graph.clone(),
            schedule: ScenarioSchedule {
                slots: vec![self.schedule.slots[k].clone()],
            },
        })
    }
}

/// Seconds since midnight for an `HH:MM` string.
fn parse_clock(s: &str) -> Option<u32> {
    let (h, m) = s.split_once(':')?;
    let h: u32 = h.parse().ok()?;
    let m: u32 = m.parse().ok()?;
    (h < 24 && m < 60).then_some(h * 3600 + m * 60)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "tiny"
population = 1
arcs = [["a", "b"]]

[stations]
goals = ["a", "b"]
charging = "a"

[[waypoints]]
id = "a"
x = 0.0
y = 0.0
radius = 1.0
label = "corridor"

[[waypoints]]
id = "b"
x = 3.0
y = 4.0
radius = 1.5
label = "shelf"

[[slots]]
id = "S1"
start = "08:00"
end = "09:00"
task_count = 4
task = { kind = "pick_and_place", from = ["a"], to = ["b"] }
occupancy = { a = 0.25, b = 0.75 }
"#;

    #[test]
    fn minimal_document() {
        let (g, s) = load_scenario(MINIMAL).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.arcs().len(), 1);
        assert_eq!(g.arcs()[0].length, 5.0);
        assert_eq!(s.slots.len(), 1);
        assert_eq!(s.slots[0].workers, 1);
        assert_eq!(s.slots[0].duration_s(), 3600.0);
    }

    #[test]
    fn unknown_waypoint_in_slot_is_named() {
        let text = MINIMAL.replace("{ a = 0.25, b = 0.75 }", "{ a = 0.25, X = 0.75 }");
        let err = load_scenario(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("'X'"), "{msg}");
        assert!(msg.contains("slots[0].occupancy.X"), "{msg}");
    }

    #[test]
    fn occupancy_must_sum_to_one() {
        let text = MINIMAL.replace("b = 0.75", "b = 0.7");
        let err = load_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("slots[0].occupancy"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("radius = 1.5", "radius = 1.5\ncolour = \"red\"");
        assert!(matches!(load_scenario(&text), Err(Error::Parse(_))));
        let text = MINIMAL.replace("kind = \"pick_and_place\"", "kind = \"pick_and_place\", speed = 2");
        assert!(matches!(load_scenario(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn disconnected_and_zero_tasks_fail() {
        let text = MINIMAL.replace("arcs = [[\"a\", \"b\"]]", "arcs = []");
        assert!(matches!(load_scenario(&text), Err(Error::Disconnected(..))));
        let text = MINIMAL.replace("task_count = 4", "task_count = 0");
        assert!(load_scenario(&text).unwrap_err().to_string().contains("task_count"));
    }

    #[test]
    fn malformed_document() {
        assert!(matches!(load_scenario("name = "), Err(Error::Parse(_))));
        let text = MINIMAL.replace("\"09:00\"", "\"9am\"");
        assert!(load_scenario(&text).unwrap_err().to_string().contains("slots[0].end"));
    }

    #[test]
    fn bundled_scenarios_load() {
        let desk = bundled_scenario("desk20").unwrap();
        assert_eq!(desk.graph.len(), 20);
        assert_eq!(desk.schedule.slots.len(), 11);
        let full = bundled_scenario("warehouse73").unwrap();
        assert_eq!(full.graph.len(), 73);
        assert_eq!(full.population, 50);
        assert!(full.schedule.slots[..10].iter().all(|s| s.task_count == 200));
        assert_eq!(full.schedule.slots[10].workers, 0);
        assert!(bundled_scenario("nope").is_err());
    }
}
