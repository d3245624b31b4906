use serde::{Deserialize, Serialize};

use crate::env::Point;
use crate::{Error, Result};

/// Hall's proxemic bands, half-open on the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxemicZone {
    Intimate,
    Personal,
    Social,
    Public,
    Beyond,
}

impl ProxemicZone {
    pub const ALL: [ProxemicZone; 5] = [
        ProxemicZone::Intimate,
        ProxemicZone::Personal,
        ProxemicZone::Social,
        ProxemicZone::Public,
        ProxemicZone::Beyond,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProxemicZone::Intimate => "intimate",
            ProxemicZone::Personal => "personal",
            ProxemicZone::Social => "social",
            ProxemicZone::Public => "public",
            ProxemicZone::Beyond => "beyond",
        }
    }
}

pub fn classify_proxemics(distance: f64) -> Result<ProxemicZone> {
    if !(distance >= 0.0) {
        return Err(Error::invalid("distance", format!("must be non-negative, got {distance}")));
    }
    Ok(match distance {
        d if d < 0.5 => ProxemicZone::Intimate,
        d if d < 1.2 => ProxemicZone::Personal,
        d if d < 3.6 => ProxemicZone::Social,
        d if d < 7.6 => ProxemicZone::Public,
        _ => ProxemicZone::Beyond,
    })
}

/// True when the person is strictly inside the robot's circumscribed circle.
pub fn detect_collision(robot: Point, person: Point, circumscribed_radius: f64) -> bool {
    robot.distance(person) < circumscribed_radius
}

/// Counts one collision event per person per entry into the robot's circle.
#[derive(Debug, Clone, Default)]
pub struct CollisionTracker {
    inside: Vec<bool>,
    events: u64,
}

impl CollisionTracker {
    pub fn new(people: usize) -> Self {
        CollisionTracker {
            inside: vec![false; people],
            events: 0,
        }
    }

    /// Updates person `i`'s state and returns whether this update is a new entry.
    pub fn observe(&mut self, i: usize, colliding: bool) -> bool {
        if i >= self.inside.len() {
            self.inside.resize(i + 1, false);
        }
        let entered = colliding && !self.inside[i];
        self.inside[i] = colliding;
        if entered {
            self.events += 1;
        }
        entered
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn reset_person(&mut self, i: usize) {
        if let Some(s) = self.inside.get_mut(i) {
            *s = false;
        }
    }
}
