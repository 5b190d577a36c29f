//! Cognitive node: keeps a decaying memory of percepts, turns the
//! motivational node's winning preference into a concrete external action
//! (approach, consummate, or explore), lets high-urgency reflexes override
//! weak motivations, and selects exactly one action per cycle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::blackboard::{
    Certainty, CogLevel, Condition, ElementaryBehaviour, InternalBehaviour, LevelId, Write,
};
use crate::error::{Error, Result};
use crate::motivational::CongruenceBehaviour;

/// Priority of the fallback walk when no preference is active.
pub const WANDER_PRIORITY: f64 = 0.05;

/// Persistents below this certainty are forgotten.
pub const PERSISTENT_FLOOR: f64 = 0.01;

/// Stimulus kind that triggers the flight reflex.
pub const THREAT_KIND: &str = "blob";
/// Stimulus kind that triggers the obstacle-avoidance reflex.
pub const OBSTACLE_KIND: &str = "obstacle";

pub const BEARING_ATTR: &str = "bearing";
pub const DISTANCE_ATTR: &str = "distance";
pub const AGE_ATTR: &str = "age";
pub const SOURCE_ATTR: &str = "source";

/// The eight external behaviours the animat can execute.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ActionKind {
    Wander,
    ExploreFor(String),
    Approach(String),
    AvoidObstacles,
    Rest,
    Eat,
    Drink,
    Runaway,
}

impl ActionKind {
    /// Canonical id, also the element id on the action levels.
    pub fn id(&self) -> String {
        match self {
            ActionKind::Wander => "wander".into(),
            ActionKind::ExploreFor(kind) => format!("explore-for({kind})"),
            ActionKind::Approach(kind) => format!("approach({kind})"),
            ActionKind::AvoidObstacles => "avoid-obstacles".into(),
            ActionKind::Rest => "rest".into(),
            ActionKind::Eat => "eat".into(),
            ActionKind::Drink => "drink".into(),
            ActionKind::Runaway => "runaway".into(),
        }
    }

    pub fn parse(s: &str) -> Result<ActionKind> {
        let parameterised = |prefix: &str| {
            s.strip_prefix(prefix)
                .and_then(|rest| rest.strip_prefix('('))
                .and_then(|rest| rest.strip_suffix(')'))
                .filter(|kind| !kind.is_empty())
                .map(str::to_string)
        };
        match s {
            "wander" => Ok(ActionKind::Wander),
            "avoid-obstacles" => Ok(ActionKind::AvoidObstacles),
            "rest" => Ok(ActionKind::Rest),
            "eat" => Ok(ActionKind::Eat),
            "drink" => Ok(ActionKind::Drink),
            "runaway" => Ok(ActionKind::Runaway),
            _ => {
                if let Some(kind) = parameterised("explore-for") {
                    Ok(ActionKind::ExploreFor(kind))
                } else if let Some(kind) = parameterised("approach") {
                    Ok(ActionKind::Approach(kind))
                } else {
                    Err(Error::input(format!("unknown action {s:?}")))
                }
            }
        }
    }

    pub fn is_consummatory(&self) -> bool {
        matches!(self, ActionKind::Eat | ActionKind::Drink | ActionKind::Rest)
    }
}

impl From<ActionKind> for String {
    fn from(a: ActionKind) -> String {
        a.id()
    }
}

impl TryFrom<String> for ActionKind {
    type Error = Error;
    fn try_from(s: String) -> Result<ActionKind> {
        ActionKind::parse(&s)
    }
}

impl std::fmt::Display for ActionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.id())
    }
}

/// Where a candidate came from. Reflexes outrank motivated actions on
/// priority ties, motivated actions outrank the wander default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionSource {
    Default,
    Motivated,
    Reflex,
}

impl ActionSource {
    pub fn rank(self) -> u8 {
        match self {
            ActionSource::Default => 0,
            ActionSource::Motivated => 1,
            ActionSource::Reflex => 2,
        }
    }

    fn from_rank(rank: f64) -> ActionSource {
        match rank as u8 {
            2 => ActionSource::Reflex,
            1 => ActionSource::Motivated,
            _ => ActionSource::Default,
        }
    }
}

/// One candidate external behaviour with its urgency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialAction {
    pub kind: ActionKind,
    pub priority: Certainty,
    pub source: ActionSource,
}

impl PotentialAction {
    pub fn new(kind: ActionKind, priority: Certainty, source: ActionSource) -> Self {
        PotentialAction {
            kind,
            priority,
            source,
        }
    }

    /// Encode for posting on an action level.
    pub fn to_write(&self, level: LevelId) -> Write {
        Write::Post {
            level,
            id: self.kind.id(),
            certainty: self.priority,
            attrs: [(SOURCE_ATTR.to_string(), self.source.rank() as f64)].into(),
        }
    }

    pub fn from_element(elem: &crate::blackboard::SolutionElement) -> Result<PotentialAction> {
        Ok(PotentialAction {
            kind: ActionKind::parse(&elem.id)?,
            priority: elem.certainty,
            source: ActionSource::from_rank(elem.attrs.get(SOURCE_ATTR).copied().unwrap_or(0.0)),
        })
    }
}

/// A stimulus as sensed this instant: what, how certain, and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Percept {
    pub kind: String,
    pub certainty: Certainty,
    /// World-frame angle from the perceiver to the stimulus, radians.
    pub bearing: f64,
    pub distance: f64,
}

/// A remembered stimulus: refreshed on direct perception, otherwise fading
/// geometrically each cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistentPercept {
    pub percept: Percept,
    /// Cycles since last direct perception.
    pub age: u32,
}

/// Fold this cycle's direct percepts into the persistent memory. Directly
/// perceived kinds reset to age 0 at their strongest current certainty;
/// unseen kinds decay by `rho` per cycle and drop below the floor.
pub fn persist_percepts(
    direct: &[Percept],
    previous: &[PersistentPercept],
    rho: f64,
) -> Vec<PersistentPercept> {
    debug_assert!(rho > 0.0 && rho < 1.0);
    let mut freshest: BTreeMap<&str, &Percept> = BTreeMap::new();
    for p in direct {
        let entry = freshest.entry(p.kind.as_str()).or_insert(p);
        if p.certainty > entry.certainty {
            *entry = p;
        }
    }
    let mut out: BTreeMap<String, PersistentPercept> = freshest
        .into_iter()
        .map(|(kind, p)| {
            (
                kind.to_string(),
                PersistentPercept {
                    percept: p.clone(),
                    age: 0,
                },
            )
        })
        .collect();
    for prev in previous {
        if out.contains_key(&prev.percept.kind) {
            continue;
        }
        let faded = Certainty::clamped(prev.percept.certainty.value() * rho);
        if faded.value() < PERSISTENT_FLOOR {
            continue;
        }
        out.insert(
            prev.percept.kind.clone(),
            PersistentPercept {
                percept: Percept {
                    certainty: faded,
                    ..prev.percept.clone()
                },
                age: prev.age + 1,
            },
        );
    }
    out.into_values().collect()
}

/// Turn the winning preference into one motivated action. With a usable
/// remembered stimulus the animat approaches (or consummates at contact);
/// with none it explores for the drive's primary stimulus; with no
/// preference at all it wanders at the default priority.
pub fn attend_to_preferences(
    preference: Option<(&CongruenceBehaviour, Certainty)>,
    persistents: &[PersistentPercept],
    contact_range: f64,
) -> PotentialAction {
    let Some((drive, congruent)) = preference else {
        return PotentialAction::new(
            ActionKind::Wander,
            Certainty::clamped(WANDER_PRIORITY),
            ActionSource::Default,
        );
    };
    // Best remembered stimulus for this drive, weighted by coupling.
    let target = persistents
        .iter()
        .filter(|p| !p.percept.certainty.is_zero())
        .filter_map(|p| {
            drive
                .couplings
                .get(&p.percept.kind)
                .map(|fa| (p, fa * p.percept.certainty.value()))
        })
        .max_by(|(a, wa), (b, wb)| {
            wa.total_cmp(wb)
                .then_with(|| b.percept.kind.cmp(&a.percept.kind))
        })
        .map(|(p, _)| p);

    let kind = match target {
        Some(p) if p.percept.distance <= contact_range => drive.consummatory.clone(),
        Some(p) => ActionKind::Approach(p.percept.kind.clone()),
        None => ActionKind::ExploreFor(drive.primary_stimulus().to_string()),
    };
    PotentialAction::new(kind, congruent, ActionSource::Motivated)
}

/// Innate reflex candidates from this instant's percepts: flee the
/// strongest threat, steer around the strongest obstacle.
pub fn reflex_candidates(percepts: &[Percept], g_r: f64, g_o: f64) -> Vec<PotentialAction> {
    let strongest = |kind: &str| {
        percepts
            .iter()
            .filter(|p| p.kind == kind)
            .map(|p| p.certainty.value())
            .fold(0.0_f64, f64::max)
    };
    let mut out = Vec::new();
    let threat = strongest(THREAT_KIND);
    if threat > 0.0 {
        out.push(PotentialAction::new(
            ActionKind::Runaway,
            Certainty::clamped(g_r * threat),
            ActionSource::Reflex,
        ));
    }
    let obstacle = strongest(OBSTACLE_KIND);
    if obstacle > 0.0 {
        out.push(PotentialAction::new(
            ActionKind::AvoidObstacles,
            Certainty::clamped(g_o * obstacle),
            ActionSource::Reflex,
        ));
    }
    out
}

/// A reflex survives only if it is at least as urgent as the strongest
/// motivated candidate; motivated candidates always pass through.
pub fn inhibit_reflexes(
    motivated: &[PotentialAction],
    reflexes: &[PotentialAction],
) -> Vec<PotentialAction> {
    let ceiling = motivated
        .iter()
        .map(|m| m.priority.value())
        .fold(0.0_f64, f64::max);
    let mut out: Vec<PotentialAction> = motivated.to_vec();
    out.extend(
        reflexes
            .iter()
            .filter(|r| r.priority.value() >= ceiling)
            .cloned(),
    );
    out
}

/// Exactly one action per cycle: highest priority wins; ties fall to the
/// higher source rank (reflex over motivated over default), then to the
/// lexicographically first action id.
pub fn select_external_behaviour(candidates: &[PotentialAction]) -> Result<PotentialAction> {
    candidates
        .iter()
        .max_by(|a, b| {
            a.priority
                .value()
                .total_cmp(&b.priority.value())
                .then_with(|| a.source.rank().cmp(&b.source.rank()))
                .then_with(|| b.kind.id().cmp(&a.kind.id()))
        })
        .cloned()
        .ok_or_else(|| Error::input("no candidate actions to select from"))
}

fn percept_from_element(elem: &crate::blackboard::SolutionElement) -> Percept {
    Percept {
        kind: elem.id.clone(),
        certainty: elem.certainty,
        bearing: elem.attrs.get(BEARING_ATTR).copied().unwrap_or(0.0),
        distance: elem.attrs.get(DISTANCE_ATTR).copied().unwrap_or(0.0),
    }
}

fn persistent_from_element(elem: &crate::blackboard::SolutionElement) -> PersistentPercept {
    PersistentPercept {
        percept: percept_from_element(elem),
        age: elem.attrs.get(AGE_ATTR).copied().unwrap_or(0.0) as u32,
    }
}

fn persistent_write(p: &PersistentPercept) -> Write {
    Write::Post {
        level: LevelId::Cog(CogLevel::PerceptualPersistents),
        id: p.percept.kind.clone(),
        certainty: p.percept.certainty,
        attrs: [
            (BEARING_ATTR.to_string(), p.percept.bearing),
            (DISTANCE_ATTR.to_string(), p.percept.distance),
            (AGE_ATTR.to_string(), p.age as f64),
        ]
        .into(),
    }
}

/// Build the persistence behaviour: one rule that refreshes the persistent
/// level from the external perceptions and retracts forgotten kinds.
pub fn persistence_behaviour(rho: f64) -> InternalBehaviour {
    InternalBehaviour {
        id: "perceptual-persistence".into(),
        uses_reac: false,
        rules: vec![ElementaryBehaviour::new(
            "refresh-and-decay",
            Condition::Always,
            move |scope| {
                let direct: Vec<Percept> = scope
                    .elements(LevelId::Cog(CogLevel::ExternalPerceptions))
                    .iter()
                    .map(|e| percept_from_element(e))
                    .collect();
                let previous: Vec<PersistentPercept> = scope
                    .elements(LevelId::Cog(CogLevel::PerceptualPersistents))
                    .iter()
                    .map(|e| persistent_from_element(e))
                    .collect();
                let next = persist_percepts(&direct, &previous, rho);
                let mut writes: Vec<Write> = previous
                    .iter()
                    .filter(|p| !next.iter().any(|n| n.percept.kind == p.percept.kind))
                    .map(|p| Write::Retract {
                        level: LevelId::Cog(CogLevel::PerceptualPersistents),
                        id: p.percept.kind.clone(),
                    })
                    .collect();
                writes.extend(next.iter().map(persistent_write));
                writes
            },
        )],
    }
}

/// Build the attention behaviour: reads the delivered preference and the
/// persistents, posts exactly one motivated (or default) action.
pub fn attention_behaviour(
    drives: Vec<CongruenceBehaviour>,
    contact_range: f64,
) -> InternalBehaviour {
    InternalBehaviour {
        id: "attention-to-preferences".into(),
        uses_reac: false,
        rules: vec![ElementaryBehaviour::new(
            "attend",
            Condition::Always,
            move |scope| {
                let winner = scope
                    .elements(LevelId::Cog(CogLevel::ConsummatoryPreferents))
                    .first()
                    .map(|e| (e.id.clone(), e.certainty));
                let preference = winner.as_ref().and_then(|(id, certainty)| {
                    drives
                        .iter()
                        .find(|d| &d.drive_id == id)
                        .map(|d| (d, *certainty))
                });
                let persistents: Vec<PersistentPercept> = scope
                    .elements(LevelId::Cog(CogLevel::PerceptualPersistents))
                    .iter()
                    .map(|e| persistent_from_element(e))
                    .collect();
                let action = attend_to_preferences(preference, &persistents, contact_range);
                vec![action.to_write(LevelId::Cog(CogLevel::DrivePerceptionCongruents))]
            },
        )],
    }
}

/// Build the reflex generation + inhibition behaviour: merges surviving
/// reflexes with the motivated candidate onto the potential-actions level.
pub fn reflex_inhibition_behaviour(g_r: f64, g_o: f64) -> InternalBehaviour {
    InternalBehaviour {
        id: "reflex-response-inhibition".into(),
        uses_reac: false,
        rules: vec![ElementaryBehaviour::new(
            "inhibit",
            Condition::Always,
            move |scope| {
                let percepts: Vec<Percept> = scope
                    .elements(LevelId::Cog(CogLevel::ExternalPerceptions))
                    .iter()
                    .map(|e| percept_from_element(e))
                    .collect();
                let reflexes = reflex_candidates(&percepts, g_r, g_o);
                let motivated: Vec<PotentialAction> = scope
                    .elements(LevelId::Cog(CogLevel::DrivePerceptionCongruents))
                    .iter()
                    .filter_map(|e| PotentialAction::from_element(e).ok())
                    .collect();
                inhibit_reflexes(&motivated, &reflexes)
                    .iter()
                    .map(|a| a.to_write(LevelId::Cog(CogLevel::PotentialActions)))
                    .collect()
            },
        )],
    }
}

/// Build the external-behaviours selector: posts the single winning action
/// to the actions level.
pub fn selection_behaviour() -> InternalBehaviour {
    InternalBehaviour {
        id: "external-behaviours-selector".into(),
        uses_reac: false,
        rules: vec![ElementaryBehaviour::new(
            "select",
            Condition::Always,
            |scope| {
                let candidates: Vec<PotentialAction> = scope
                    .elements(LevelId::Cog(CogLevel::PotentialActions))
                    .iter()
                    .filter_map(|e| PotentialAction::from_element(e).ok())
                    .collect();
                match select_external_behaviour(&candidates) {
                    Ok(action) => vec![action.to_write(LevelId::Cog(CogLevel::Actions))],
                    Err(_) => Vec::new(),
                }
            },
        )],
    }
}
