//! A 2D world for the network to act in: consumable and hazardous objects,
//! an animat with internal needs and condition variables, distance-scaled
//! perception, simple kinematics per action, and timed world events.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blackboard::Certainty;
use crate::cognitive::{ActionKind, Percept};
use crate::error::{Error, Result};

/// Heading change bounds per exploration style, radians.
const WANDER_TURN: f64 = PI / 6.0;
const EXPLORE_TURN: f64 = PI / 18.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Food,
    Water,
    Grass,
    Blob,
    Obstacle,
    Spot,
}

impl ObjectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectKind::Food => "food",
            ObjectKind::Water => "water",
            ObjectKind::Grass => "grass",
            ObjectKind::Blob => "blob",
            ObjectKind::Obstacle => "obstacle",
            ObjectKind::Spot => "spot",
        }
    }

    /// Kinds a consummatory action can draw from.
    fn consumable_by(self, action: &ActionKind) -> bool {
        match action {
            ActionKind::Eat => matches!(self, ObjectKind::Food | ObjectKind::Grass),
            ActionKind::Drink => matches!(self, ObjectKind::Water),
            _ => false,
        }
    }
}

impl std::fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_radius() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldObject {
    pub id: String,
    pub kind: ObjectKind,
    pub position: [f64; 2],
    /// Physical extent; only obstacles block movement.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Perceived intensity and nutritional value, in `[0, 1]`.
    pub quality: f64,
    /// Remaining consumable amount; `None` never depletes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stock: Option<f64>,
}

impl WorldObject {
    fn validate(&self, bounds: [f64; 2]) -> Result<()> {
        let err = |reason: String| Error::config(format!("object {:?}: {reason}", self.id));
        if !(self.quality.is_finite() && (0.0..=1.0).contains(&self.quality)) {
            return Err(err(format!("quality {} outside [0, 1]", self.quality)));
        }
        if self.kind == ObjectKind::Grass && self.quality > 0.5 {
            return Err(err(format!(
                "grass quality {} above the 0.5 ceiling",
                self.quality
            )));
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return Err(err(format!(
                "radius {} must be finite and >= 0",
                self.radius
            )));
        }
        if let Some(s) = self.stock {
            if !(s.is_finite() && s > 0.0) {
                return Err(err(format!("stock {s} must be finite and positive")));
            }
        }
        if !in_bounds(self.position, bounds) {
            return Err(err(format!(
                "position {:?} outside the world",
                self.position
            )));
        }
        Ok(())
    }
}

fn default_v_max() -> f64 {
    1.0
}
fn default_condition() -> f64 {
    1.0
}

/// The animat: pose, speed limit, needs, and the two condition variables
/// that modulate movement and perception.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimatState {
    pub position: [f64; 2],
    #[serde(default)]
    pub heading: f64,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default)]
    pub hunger: f64,
    #[serde(default)]
    pub thirst: f64,
    #[serde(default)]
    pub fatigue: f64,
    /// Scales every movement speed.
    #[serde(default = "default_condition")]
    pub strength: f64,
    /// Scales the perception radius.
    #[serde(default = "default_condition")]
    pub lucidity: f64,
}

impl AnimatState {
    /// Internal perception for one drive id, if it names a need.
    pub fn drive_value(&self, id: &str) -> Option<f64> {
        match id {
            "hunger" => Some(self.hunger),
            "thirst" => Some(self.thirst),
            "fatigue" => Some(self.fatigue),
            _ => None,
        }
    }

    fn validate(&self, bounds: [f64; 2]) -> Result<()> {
        for (name, v) in [
            ("hunger", self.hunger),
            ("thirst", self.thirst),
            ("fatigue", self.fatigue),
            ("strength", self.strength),
            ("lucidity", self.lucidity),
        ] {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(Error::config(format!("animat {name} {v} outside [0, 1]")));
            }
        }
        if !(self.v_max.is_finite() && self.v_max > 0.0) {
            return Err(Error::config(format!(
                "animat v_max {} must be positive",
                self.v_max
            )));
        }
        if !self.heading.is_finite() {
            return Err(Error::config("animat heading must be finite"));
        }
        if !in_bounds(self.position, bounds) {
            return Err(Error::config(format!(
                "animat position {:?} outside the world",
                self.position
            )));
        }
        Ok(())
    }
}

fn rate(v: f64) -> f64 {
    v
}

/// Per-tick physiology constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Rates {
    /// Hunger and thirst growth per tick.
    pub need_growth: f64,
    /// Fatigue growth per tick at full speed, scaled by speed fraction.
    pub fatigue_growth: f64,
    /// Need relief per consummatory tick, scaled by source quality.
    pub relief: f64,
    /// Fatigue relief per resting tick.
    pub rest_relief: f64,
    /// Stock drawn from a source per consummatory tick.
    pub consumption: f64,
    /// Strength/lucidity adaptation rate toward their need setpoints.
    pub condition_drift: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Rates {
            need_growth: rate(0.002),
            fatigue_growth: rate(0.002),
            relief: rate(0.05),
            rest_relief: rate(0.03),
            consumption: rate(0.05),
            condition_drift: rate(0.005),
        }
    }
}

impl Rates {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("need_growth", self.need_growth),
            ("fatigue_growth", self.fatigue_growth),
            ("relief", self.relief),
            ("rest_relief", self.rest_relief),
            ("consumption", self.consumption),
            ("condition_drift", self.condition_drift),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("rate {name} {v} must be >= 0")));
            }
        }
        if self.consumption == 0.0 {
            return Err(Error::config("consumption rate must be positive"));
        }
        Ok(())
    }
}

/// A change to the object population, keyed by the tick at which it takes
/// effect (visible to that tick's sensing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorldEvent {
    Insert(WorldObject),
    Remove(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedEvent {
    pub tick: u64,
    #[serde(flatten)]
    pub event: WorldEvent,
}

fn default_perception_radius() -> f64 {
    30.0
}
fn default_contact_range() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub bounds: [f64; 2],
    /// Perception radius at full lucidity.
    #[serde(default = "default_perception_radius")]
    pub perception_radius: f64,
    /// Distance at or under which consummatory actions reach a source.
    #[serde(default = "default_contact_range")]
    pub contact_range: f64,
    pub animat: AnimatState,
    #[serde(default)]
    pub rates: Rates,
    #[serde(default)]
    pub objects: Vec<WorldObject>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<TimedEvent>,
}

/// What executing one action did to the world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionOutcome {
    pub action: ActionKind,
    /// Distance actually moved.
    pub speed: f64,
    /// Source consumed from this tick, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consumed: Option<Consumed>,
    /// A consummatory action found nothing in range.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub no_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Consumed {
    pub object: String,
    pub kind: ObjectKind,
    pub quality: f64,
}

pub struct WorldState {
    pub bounds: [f64; 2],
    pub perception_radius: f64,
    pub contact_range: f64,
    pub animat: AnimatState,
    pub rates: Rates,
    objects: Vec<WorldObject>,
    events: BTreeMap<u64, Vec<WorldEvent>>,
    tick: u64,
    rng: ChaCha8Rng,
}

fn in_bounds(p: [f64; 2], bounds: [f64; 2]) -> bool {
    p.iter().all(|v| v.is_finite())
        && (0.0..=bounds[0]).contains(&p[0])
        && (0.0..=bounds[1]).contains(&p[1])
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn bearing(from: [f64; 2], to: [f64; 2]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

/// Wrap into `(-pi, pi]`.
fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

impl WorldState {
    pub fn new(config: WorldConfig, seed: u64) -> Result<WorldState> {
        let bounds = config.bounds;
        if !(bounds.iter().all(|v| v.is_finite() && *v > 0.0)) {
            return Err(Error::config(format!("bounds {bounds:?} must be positive")));
        }
        if !(config.perception_radius.is_finite() && config.perception_radius > 0.0) {
            return Err(Error::config(format!(
                "perception radius {} must be positive",
                config.perception_radius
            )));
        }
        if !(config.contact_range.is_finite() && config.contact_range > 0.0) {
            return Err(Error::config(format!(
                "contact range {} must be positive",
                config.contact_range
            )));
        }
        config.animat.validate(bounds)?;
        config.rates.validate()?;

        let mut events: BTreeMap<u64, Vec<WorldEvent>> = BTreeMap::new();
        for te in config.events {
            if let WorldEvent::Insert(obj) = &te.event {
                obj.validate(bounds)?;
            }
            events.entry(te.tick).or_default().push(te.event);
        }

        let mut world = WorldState {
            bounds,
            perception_radius: config.perception_radius,
            contact_range: config.contact_range,
            animat: config.animat,
            rates: config.rates,
            objects: Vec::new(),
            events,
            tick: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        for obj in config.objects {
            obj.validate(bounds)?;
            world.insert_object(obj)?;
        }
        world.apply_events_for(0)?;
        if world.overlapping_obstacle(world.animat.position).is_some() {
            return Err(Error::config("animat starts inside an obstacle"));
        }
        Ok(world)
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn objects(&self) -> &[WorldObject] {
        &self.objects
    }

    pub fn object(&self, id: &str) -> Option<&WorldObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Kinds present in the world this tick, perceivable or not.
    pub fn kinds_present(&self) -> BTreeSet<String> {
        self.objects
            .iter()
            .map(|o| o.kind.as_str().to_string())
            .collect()
    }

    fn insert_object(&mut self, obj: WorldObject) -> Result<()> {
        if self.objects.iter().any(|o| o.id == obj.id) {
            return Err(Error::structural(format!(
                "object id {:?} already in the world",
                obj.id
            )));
        }
        self.objects.push(obj);
        Ok(())
    }

    fn apply_events_for(&mut self, tick: u64) -> Result<()> {
        let Some(batch) = self.events.remove(&tick) else {
            return Ok(());
        };
        for event in batch {
            match event {
                WorldEvent::Insert(obj) => self.insert_object(obj)?,
                WorldEvent::Remove(id) => {
                    let before = self.objects.len();
                    self.objects.retain(|o| o.id != id);
                    if self.objects.len() == before {
                        log::warn!("remove event for absent object {id:?}");
                    }
                }
            }
        }
        Ok(())
    }

    /// Perceive every object in range. Certainty falls linearly with
    /// distance and vanishes at the lucidity-scaled radius.
    pub fn sense(&self) -> Vec<Percept> {
        let r = self.perception_radius * self.animat.lucidity;
        let mut out: Vec<(Percept, &str)> = Vec::new();
        if r <= 0.0 {
            return Vec::new();
        }
        for obj in &self.objects {
            let d = distance(self.animat.position, obj.position);
            let fade = 1.0 - d / r;
            if fade <= 0.0 {
                continue;
            }
            let certainty = Certainty::clamped(obj.quality * fade);
            if certainty.is_zero() {
                continue;
            }
            out.push((
                Percept {
                    kind: obj.kind.as_str().to_string(),
                    certainty,
                    bearing: bearing(self.animat.position, obj.position),
                    distance: d,
                },
                obj.id.as_str(),
            ));
        }
        out.sort_by(|(a, ida), (b, idb)| {
            a.kind
                .cmp(&b.kind)
                .then_with(|| b.certainty.value().total_cmp(&a.certainty.value()))
                .then_with(|| a.distance.total_cmp(&b.distance))
                .then_with(|| ida.cmp(idb))
        });
        out.into_iter().map(|(p, _)| p).collect()
    }

    /// Strongest perceivable object of a kind: highest certainty, then
    /// nearest, then first id.
    fn strongest_of_kind(&self, kind: ObjectKind) -> Option<&WorldObject> {
        let r = self.perception_radius * self.animat.lucidity;
        self.objects
            .iter()
            .filter(|o| o.kind == kind)
            .filter_map(|o| {
                let d = distance(self.animat.position, o.position);
                let c = o.quality * (1.0 - d / r);
                (r > 0.0 && c > 0.0).then_some((o, c, d))
            })
            .max_by(|(oa, ca, da), (ob, cb, db)| {
                ca.total_cmp(cb)
                    .then_with(|| db.total_cmp(da))
                    .then_with(|| ob.id.cmp(&oa.id))
            })
            .map(|(o, _, _)| o)
    }

    /// Nearest object a consummatory action can draw from, within contact.
    fn consumable_in_range(&self, action: &ActionKind) -> Option<usize> {
        self.objects
            .iter()
            .enumerate()
            .filter(|(_, o)| o.kind.consumable_by(action))
            .map(|(i, o)| (i, distance(self.animat.position, o.position)))
            .filter(|(_, d)| *d <= self.contact_range)
            .min_by(|(ia, da), (ib, db)| {
                da.total_cmp(db)
                    .then_with(|| self.objects[*ia].id.cmp(&self.objects[*ib].id))
            })
            .map(|(i, _)| i)
    }

    fn overlapping_obstacle(&self, p: [f64; 2]) -> Option<&WorldObject> {
        self.objects
            .iter()
            .find(|o| o.kind == ObjectKind::Obstacle && distance(p, o.position) < o.radius)
    }

    /// Move along the current heading, clip to bounds, and resolve
    /// obstacle overlap by radial push-out (reverting when stuck).
    fn travel(&mut self, requested: f64) -> f64 {
        let prev = self.animat.position;
        let (sin, cos) = self.animat.heading.sin_cos();
        let mut p = [prev[0] + requested * cos, prev[1] + requested * sin];
        p[0] = p[0].clamp(0.0, self.bounds[0]);
        p[1] = p[1].clamp(0.0, self.bounds[1]);
        if let Some(obstacle) = self.overlapping_obstacle(p) {
            let d = distance(obstacle.position, p);
            if d > 1e-9 {
                let scale = obstacle.radius / d;
                p = [
                    obstacle.position[0] + (p[0] - obstacle.position[0]) * scale,
                    obstacle.position[1] + (p[1] - obstacle.position[1]) * scale,
                ];
                p[0] = p[0].clamp(0.0, self.bounds[0]);
                p[1] = p[1].clamp(0.0, self.bounds[1]);
            } else {
                p = prev;
            }
        }
        if self.overlapping_obstacle(p).is_some() {
            p = prev;
        }
        self.animat.position = p;
        distance(prev, p)
    }

    /// Execute one action. Only the two exploration styles draw from the
    /// random stream, one sample each.
    fn apply_action(&mut self, action: &ActionKind) -> ActionOutcome {
        let a = &self.animat;
        let pace = a.v_max * a.strength;
        let mut consumed = None;
        let mut no_target = false;

        let speed = match action {
            ActionKind::Wander => {
                let turn = self.rng.gen_range(-WANDER_TURN..=WANDER_TURN);
                self.animat.heading = wrap_angle(self.animat.heading + turn);
                self.travel(0.5 * pace)
            }
            ActionKind::ExploreFor(_) => {
                let turn = self.rng.gen_range(-EXPLORE_TURN..=EXPLORE_TURN);
                self.animat.heading = wrap_angle(self.animat.heading + turn);
                self.travel(pace)
            }
            ActionKind::Approach(kind_name) => {
                let target = ObjectKind::parse_kind(kind_name)
                    .ok()
                    .and_then(|k| self.strongest_of_kind(k))
                    .map(|o| (o.position, distance(self.animat.position, o.position)));
                match target {
                    Some((pos, d)) => {
                        self.animat.heading = bearing(self.animat.position, pos);
                        self.travel(pace.min(d))
                    }
                    // Nothing of the kind in view: press on straight.
                    None => self.travel(pace),
                }
            }
            ActionKind::Runaway => {
                let threat = self
                    .strongest_of_kind(ObjectKind::Blob)
                    .map(|o| bearing(self.animat.position, o.position));
                if let Some(b) = threat {
                    self.animat.heading = wrap_angle(b + PI);
                }
                self.travel(pace)
            }
            ActionKind::AvoidObstacles => {
                let obstacle = self
                    .strongest_of_kind(ObjectKind::Obstacle)
                    .map(|o| bearing(self.animat.position, o.position));
                if let Some(b) = obstacle {
                    // Steer perpendicular, on the side already faced.
                    let delta = wrap_angle(self.animat.heading - b);
                    let side = if delta >= 0.0 { 1.0 } else { -1.0 };
                    self.animat.heading = wrap_angle(b + side * PI / 2.0);
                }
                self.travel(pace)
            }
            ActionKind::Eat | ActionKind::Drink => {
                match self.consumable_in_range(action) {
                    Some(i) => {
                        let obj = &mut self.objects[i];
                        if let Some(stock) = obj.stock.as_mut() {
                            *stock -= self.rates.consumption;
                        }
                        consumed = Some(Consumed {
                            object: obj.id.clone(),
                            kind: obj.kind,
                            quality: obj.quality,
                        });
                    }
                    None => no_target = true,
                }
                0.0
            }
            ActionKind::Rest => 0.0,
        };

        ActionOutcome {
            action: action.clone(),
            speed,
            consumed,
            no_target,
        }
    }

    fn update_internal_states(&mut self, outcome: &ActionOutcome) {
        let r = &self.rates;
        let a = &mut self.animat;

        a.hunger += r.need_growth;
        a.thirst += r.need_growth;
        a.fatigue += r.fatigue_growth * (outcome.speed / a.v_max);

        if let Some(c) = &outcome.consumed {
            match outcome.action {
                ActionKind::Eat => a.hunger -= r.relief * c.quality,
                ActionKind::Drink => a.thirst -= r.relief * c.quality,
                _ => {}
            }
        }
        if outcome.action == ActionKind::Rest {
            a.fatigue -= r.rest_relief;
        }

        a.hunger = a.hunger.clamp(0.0, 1.0);
        a.thirst = a.thirst.clamp(0.0, 1.0);
        a.fatigue = a.fatigue.clamp(0.0, 1.0);

        a.strength = (a.strength + r.condition_drift * (0.5 - a.hunger)).clamp(0.0, 1.0);
        a.lucidity =
            (a.lucidity + r.condition_drift * (0.5 - a.thirst.max(a.fatigue))).clamp(0.0, 1.0);
    }

    /// Advance one tick: execute the action, update the needs, drop
    /// exhausted sources, then apply the next tick's events so they are
    /// visible to its sensing.
    pub fn world_step(&mut self, action: &ActionKind) -> Result<ActionOutcome> {
        let outcome = self.apply_action(action);
        self.update_internal_states(&outcome);
        self.objects
            .retain(|o| o.stock.map(|s| s > 0.0).unwrap_or(true));
        self.tick += 1;
        self.apply_events_for(self.tick)?;
        Ok(outcome)
    }
}

impl ObjectKind {
    pub fn parse_kind(s: &str) -> Result<ObjectKind> {
        match s {
            "food" => Ok(ObjectKind::Food),
            "water" => Ok(ObjectKind::Water),
            "grass" => Ok(ObjectKind::Grass),
            "blob" => Ok(ObjectKind::Blob),
            "obstacle" => Ok(ObjectKind::Obstacle),
            "spot" => Ok(ObjectKind::Spot),
            _ => Err(Error::input(format!("unknown object kind {s:?}"))),
        }
    }
}
