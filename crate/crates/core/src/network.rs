//! The assembled two-node network: a motivational node and a cognitive
//! node wired by two channels, stepped through a fixed stage order so a
//! stimulus sensed this tick can select an action this same tick.
//!
//! Stage order per tick: external percepts in, perceptual persistence,
//! persistents over to the motivational node, internal percepts in,
//! congruence, preference selection back to the cognitive node, attention,
//! reflex inhibition, external selection.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::blackboard::{
    Certainty, ChannelRegistry, CogLevel, LevelId, MotLevel, NodeSnapshot, NodeState, Reac,
};
use crate::cognitive::{self, ActionKind, Percept, PotentialAction, BEARING_ATTR, DISTANCE_ATTR};
use crate::error::{Error, Result};
use crate::motivational::{self, CongruenceBehaviour, DriveState, RAW_ATTR};

fn default_lambda() -> f64 {
    0.3
}
fn default_rho() -> f64 {
    0.9
}
fn default_contact_range() -> f64 {
    1.0
}
fn default_runaway_gain() -> f64 {
    1.0
}
fn default_avoid_gain() -> f64 {
    0.8
}

/// One drive's configuration. `alpha` overrides the network-wide factor
/// when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub id: String,
    pub couplings: BTreeMap<String, f64>,
    pub consummatory: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

/// Network-wide parameters plus the drive set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Internal/external blending factor applied to every drive that does
    /// not override it.
    pub alpha: f64,
    /// Drive feedback fraction, in `[0, 1)`.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Per-cycle decay of unseen persistent percepts, in `(0, 1)`.
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Distance at or under which a consummatory action replaces approach.
    #[serde(default = "default_contact_range")]
    pub contact_range: f64,
    /// Flight reflex priority per unit of threat certainty.
    #[serde(default = "default_runaway_gain")]
    pub runaway_gain: f64,
    /// Avoidance reflex priority per unit of obstacle certainty.
    #[serde(default = "default_avoid_gain")]
    pub avoid_gain: f64,
    pub drives: Vec<DriveConfig>,
}

impl NetworkConfig {
    pub fn new(alpha: f64, drives: Vec<DriveConfig>) -> Self {
        NetworkConfig {
            alpha,
            lambda: default_lambda(),
            rho: default_rho(),
            contact_range: default_contact_range(),
            runaway_gain: default_runaway_gain(),
            avoid_gain: default_avoid_gain(),
            drives,
        }
    }

    /// Resolve per-drive overrides into validated congruence behaviours.
    pub fn resolve_drives(&self) -> Result<Vec<CongruenceBehaviour>> {
        if self.drives.is_empty() {
            return Err(Error::config("at least one drive required"));
        }
        let mut seen = BTreeSet::new();
        self.drives
            .iter()
            .map(|d| {
                if !seen.insert(d.id.clone()) {
                    return Err(Error::config(format!("duplicate drive id {:?}", d.id)));
                }
                CongruenceBehaviour::new(
                    d.id.clone(),
                    d.alpha.unwrap_or(self.alpha),
                    d.couplings.clone(),
                    d.consummatory.clone(),
                )
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && (0.0..=1.0).contains(&self.alpha)) {
            return Err(Error::config(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if !(self.lambda.is_finite() && (0.0..1.0).contains(&self.lambda)) {
            return Err(Error::config(format!(
                "lambda {} outside [0, 1)",
                self.lambda
            )));
        }
        if !(self.rho.is_finite() && self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::config(format!("rho {} outside (0, 1)", self.rho)));
        }
        if !(self.contact_range.is_finite() && self.contact_range > 0.0) {
            return Err(Error::config(format!(
                "contact range {} must be positive",
                self.contact_range
            )));
        }
        for (name, g) in [
            ("runaway gain", self.runaway_gain),
            ("avoid gain", self.avoid_gain),
        ] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::config(format!("{name} {g} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Everything the network senses in one tick: external stimuli and the
/// internal state of every configured drive.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub percepts: Vec<Percept>,
    /// Drive id -> internal perception in `[0, 1]`.
    pub internal: BTreeMap<String, f64>,
}

impl SensorFrame {
    fn validate(&self, drive_ids: &BTreeSet<String>) -> Result<()> {
        for id in drive_ids {
            let v = self
                .internal
                .get(id)
                .ok_or_else(|| Error::input(format!("internal perception for {id:?} missing")))?;
            if !(v.is_finite() && (0.0..=1.0).contains(v)) {
                return Err(Error::input(format!(
                    "internal perception {id} = {v} outside [0, 1]"
                )));
            }
        }
        for id in self.internal.keys() {
            if !drive_ids.contains(id) {
                return Err(Error::input(format!("no drive configured for {id:?}")));
            }
        }
        for p in &self.percepts {
            if !(p.distance.is_finite() && p.distance >= 0.0 && p.bearing.is_finite()) {
                return Err(Error::input(format!(
                    "percept {} has bad geometry (distance {}, bearing {})",
                    p.kind, p.distance, p.bearing
                )));
            }
        }
        Ok(())
    }
}

/// The winning consummatory preference of one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preference {
    pub drive: String,
    pub certainty: f64,
}

/// One drive's congruent this tick, before and after clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CongruentValue {
    pub raw: f64,
    pub clamped: f64,
}

/// What one tick produced, for tracing and inspection.
#[derive(Debug, Clone, Serialize)]
pub struct CycleReport {
    pub tick: u64,
    /// Strongest percept per kind, as posted to the cognitive node.
    pub percepts: Vec<Percept>,
    pub congruents: BTreeMap<String, CongruentValue>,
    /// Drive id -> feedback signal used this tick.
    pub drive_feedback: BTreeMap<String, f64>,
    pub preference: Option<Preference>,
    /// Candidates surviving reflex inhibition.
    pub candidates: Vec<PotentialAction>,
    pub selected: PotentialAction,
    /// Preference-competition registers, in registration order.
    pub reacs: Vec<Reac>,
}

/// Serializable state of both nodes, for determinism checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSnapshot {
    pub cognitive: NodeSnapshot,
    pub motivational: NodeSnapshot,
}

const MOT_CONGRUENCE: usize = 0;
const MOT_PREFERENCE: usize = 1;
const COG_PERSISTENCE: usize = 0;
const COG_ATTENTION: usize = 1;
const COG_REFLEXES: usize = 2;
const COG_SELECTION: usize = 3;

pub struct Network {
    cognitive: NodeState,
    motivational: NodeState,
    registry: ChannelRegistry,
    drives: Vec<CongruenceBehaviour>,
    drive_ids: BTreeSet<String>,
    config: NetworkConfig,
    tick: u64,
}

impl Network {
    pub fn new(config: NetworkConfig) -> Result<Network> {
        config.validate()?;
        let drives = config.resolve_drives()?;
        for d in &drives {
            DriveState::new(d.drive_id.clone(), config.lambda)?;
        }

        let mut cognitive = NodeState::cognitive();
        let mut motivational = NodeState::motivational();
        let mut registry = ChannelRegistry::new();

        registry.connect(
            &mut cognitive,
            &mut motivational,
            [(
                LevelId::Cog(CogLevel::PerceptualPersistents),
                LevelId::Mot(MotLevel::ExternalPerceptions),
            )]
            .into(),
        )?;
        let preference_channel =
            registry.connect(&mut motivational, &mut cognitive, BTreeMap::new())?;

        let added =
            motivational.add_behaviour(motivational::congruence_behaviour(&drives, config.lambda));
        debug_assert_eq!(added, MOT_CONGRUENCE);
        let added = motivational.add_behaviour(motivational::preference_selector(
            &drives,
            preference_channel,
        ));
        debug_assert_eq!(added, MOT_PREFERENCE);

        let added = cognitive.add_behaviour(cognitive::persistence_behaviour(config.rho));
        debug_assert_eq!(added, COG_PERSISTENCE);
        let added = cognitive.add_behaviour(cognitive::attention_behaviour(
            drives.clone(),
            config.contact_range,
        ));
        debug_assert_eq!(added, COG_ATTENTION);
        let added = cognitive.add_behaviour(cognitive::reflex_inhibition_behaviour(
            config.runaway_gain,
            config.avoid_gain,
        ));
        debug_assert_eq!(added, COG_REFLEXES);
        let added = cognitive.add_behaviour(cognitive::selection_behaviour());
        debug_assert_eq!(added, COG_SELECTION);

        let drive_ids = drives.iter().map(|d| d.drive_id.clone()).collect();
        Ok(Network {
            cognitive,
            motivational,
            registry,
            drives,
            drive_ids,
            config,
            tick: 0,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn drives(&self) -> &[CongruenceBehaviour] {
        &self.drives
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn cognitive(&self) -> &NodeState {
        &self.cognitive
    }

    pub fn motivational(&self) -> &NodeState {
        &self.motivational
    }

    pub fn snapshot(&self) -> NetworkSnapshot {
        NetworkSnapshot {
            cognitive: self.cognitive.snapshot(),
            motivational: self.motivational.snapshot(),
        }
    }

    /// Strongest percept per kind: highest certainty, then nearest, then
    /// smallest bearing.
    fn strongest_per_kind(percepts: &[Percept]) -> Vec<Percept> {
        let mut best: BTreeMap<&str, &Percept> = BTreeMap::new();
        for p in percepts {
            let entry = best.entry(p.kind.as_str()).or_insert(p);
            let better = p
                .certainty
                .value()
                .total_cmp(&entry.certainty.value())
                .then_with(|| entry.distance.total_cmp(&p.distance))
                .then_with(|| entry.bearing.total_cmp(&p.bearing))
                .is_gt();
            if better {
                *entry = p;
            }
        }
        best.into_values().cloned().collect()
    }

    /// Run one full tick. A stimulus in `frame` can influence the selected
    /// action of this same call.
    pub fn step(&mut self, frame: &SensorFrame) -> Result<CycleReport> {
        frame.validate(&self.drive_ids)?;
        let tick = self.tick;
        self.cognitive.set_cycle(tick);
        self.motivational.set_cycle(tick);
        self.cognitive.clear_reacs();
        self.motivational.clear_reacs();

        // External percepts onto the cognitive node.
        let percepts = Self::strongest_per_kind(&frame.percepts);
        self.cognitive
            .clear_level(LevelId::Cog(CogLevel::ExternalPerceptions))?;
        for p in &percepts {
            self.cognitive.post_element(
                LevelId::Cog(CogLevel::ExternalPerceptions),
                p.kind.clone(),
                p.certainty,
                [
                    (BEARING_ATTR.to_string(), p.bearing),
                    (DISTANCE_ATTR.to_string(), p.distance),
                ]
                .into(),
            )?;
        }

        // Perceptual persistence, then hand the persistents over.
        self.cognitive
            .fire_behaviour(COG_PERSISTENCE, &mut self.registry)?;
        self.motivational
            .clear_level(LevelId::Mot(MotLevel::ExternalPerceptions))?;
        self.cognitive.flush_emissions(&mut self.registry)?;
        self.registry.deliver(&mut self.motivational)?;

        // Internal percepts onto the motivational node.
        self.motivational
            .clear_level(LevelId::Mot(MotLevel::InternalPerceptions))?;
        for (id, v) in &frame.internal {
            self.motivational.post_element(
                LevelId::Mot(MotLevel::InternalPerceptions),
                id.clone(),
                Certainty::checked(*v)?,
                BTreeMap::new(),
            )?;
        }

        // Congruence, then the preference competition back to cognition.
        self.motivational
            .fire_behaviour(MOT_CONGRUENCE, &mut self.registry)?;
        self.cognitive
            .clear_level(LevelId::Cog(CogLevel::ConsummatoryPreferents))?;
        self.motivational
            .fire_behaviour(MOT_PREFERENCE, &mut self.registry)?;
        self.motivational.flush_emissions(&mut self.registry)?;
        self.registry.deliver(&mut self.cognitive)?;

        // Attention, reflex inhibition, selection.
        self.cognitive
            .clear_level(LevelId::Cog(CogLevel::DrivePerceptionCongruents))?;
        self.cognitive
            .fire_behaviour(COG_ATTENTION, &mut self.registry)?;
        self.cognitive
            .clear_level(LevelId::Cog(CogLevel::PotentialActions))?;
        self.cognitive
            .fire_behaviour(COG_REFLEXES, &mut self.registry)?;
        self.cognitive
            .clear_level(LevelId::Cog(CogLevel::Actions))?;
        self.cognitive
            .fire_behaviour(COG_SELECTION, &mut self.registry)?;
        self.cognitive.flush_emissions(&mut self.registry)?;

        let report = self.report(tick, percepts)?;
        self.tick += 1;
        Ok(report)
    }

    fn report(&self, tick: u64, percepts: Vec<Percept>) -> Result<CycleReport> {
        let congruents = self
            .motivational
            .read_elements(LevelId::Mot(MotLevel::Congruents), None)?
            .into_iter()
            .map(|e| {
                let clamped = e.certainty.value();
                let raw = e.attrs.get(RAW_ATTR).copied().unwrap_or(clamped);
                (e.id.clone(), CongruentValue { raw, clamped })
            })
            .collect();
        let drive_feedback = self
            .motivational
            .read_elements(LevelId::Mot(MotLevel::Drive), None)?
            .into_iter()
            .map(|e| (e.id.clone(), e.certainty.value()))
            .collect();
        let preference = self
            .cognitive
            .read_elements(LevelId::Cog(CogLevel::ConsummatoryPreferents), None)?
            .first()
            .map(|e| Preference {
                drive: e.id.clone(),
                certainty: e.certainty.value(),
            });
        let candidates = self
            .cognitive
            .read_elements(LevelId::Cog(CogLevel::PotentialActions), None)?
            .into_iter()
            .map(PotentialAction::from_element)
            .collect::<Result<Vec<_>>>()?;
        let selected = self
            .cognitive
            .read_elements(LevelId::Cog(CogLevel::Actions), None)?
            .first()
            .map(|e| PotentialAction::from_element(e))
            .transpose()?
            .ok_or_else(|| Error::structural("no action selected this tick"))?;
        Ok(CycleReport {
            tick,
            percepts,
            congruents,
            drive_feedback,
            preference,
            candidates,
            selected,
            reacs: self.motivational.reacs().to_vec(),
        })
    }
}
