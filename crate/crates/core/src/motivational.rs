//! Motivational node: per-drive congruence of internal perception,
//! associated external stimuli, and drive feedback into a single activity
//! value, plus the winner-take-all selection of a consummatory preference.
//!
//! The activity value for drive `i` is
//! `o_e * (alpha + sum_j Fa_ij * o_s_j) + o_d`: with `alpha = 0` the
//! external perception and at least one associated stimulus are both
//! required; with `alpha > 0` the internal perception alone is enough.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::blackboard::{
    Certainty, CertaintyTest, ChannelId, CogLevel, Condition, ConditionClause, ElementaryBehaviour,
    IdPattern, InternalBehaviour, LevelId, MotLevel, Write,
};
use crate::cognitive::ActionKind;
use crate::error::{Error, Result};

/// Raw congruent values are kept alongside the clamped certainty under
/// this attribute key so traces can re-derive them.
pub const RAW_ATTR: &str = "raw";

/// Configuration of one drive's congruence: its blending factor, the
/// stimuli that can satisfy it with their coupling strengths, and the
/// consummatory action that discharges it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongruenceBehaviour {
    pub drive_id: String,
    /// Internal/external blending factor in `[0, 1]`.
    pub alpha: f64,
    /// Stimulus kind -> coupling strength `Fa >= 0`. Never empty.
    pub couplings: BTreeMap<String, f64>,
    pub consummatory: ActionKind,
}

impl CongruenceBehaviour {
    pub fn new(
        drive_id: impl Into<String>,
        alpha: f64,
        couplings: BTreeMap<String, f64>,
        consummatory: ActionKind,
    ) -> Result<Self> {
        let drive_id = drive_id.into();
        if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
            return Err(Error::config(format!(
                "drive {drive_id}: alpha {alpha} outside [0, 1]"
            )));
        }
        if couplings.is_empty() {
            return Err(Error::config(format!(
                "drive {drive_id}: at least one associated stimulus required"
            )));
        }
        for (kind, fa) in &couplings {
            if !(fa.is_finite() && *fa >= 0.0) {
                return Err(Error::config(format!(
                    "drive {drive_id}: coupling {kind} = {fa} must be finite and >= 0"
                )));
            }
        }
        if !consummatory.is_consummatory() {
            return Err(Error::config(format!(
                "drive {drive_id}: {} is not a consummatory action",
                consummatory.id()
            )));
        }
        Ok(CongruenceBehaviour {
            drive_id,
            alpha,
            couplings,
            consummatory,
        })
    }

    /// The stimulus this drive sends the animat looking for when nothing
    /// associated is perceived: strongest coupling, ties to the
    /// lexicographically first kind.
    pub fn primary_stimulus(&self) -> &str {
        self.couplings
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(k, _)| k.as_str())
            .expect("couplings are never empty")
    }
}

/// Raw (unclamped) congruence value. Stimuli present in `o_s` but not in
/// the coupling table are irrelevant to this drive and are skipped with a
/// warning.
pub fn evaluate_congruence(
    beh: &CongruenceBehaviour,
    o_e: Certainty,
    o_s: &BTreeMap<String, Certainty>,
    o_d: Certainty,
) -> f64 {
    for kind in o_s.keys() {
        if !beh.couplings.contains_key(kind) {
            log::warn!(
                "drive {}: stimulus {kind} has no coupling, ignored",
                beh.drive_id
            );
        }
    }
    let weighted: f64 = beh
        .couplings
        .iter()
        .map(|(kind, fa)| fa * o_s.get(kind).map(|c| c.value()).unwrap_or(0.0))
        .sum();
    o_e.value() * (beh.alpha + weighted) + o_d.value()
}

/// Firing condition for a drive's congruence. Zero comparisons are exact:
/// with `alpha = 0` some associated stimulus must be strictly present,
/// with `alpha != 0` the external perception alone decides.
pub fn congruence_condition(
    beh: &CongruenceBehaviour,
    o_e: Certainty,
    o_s: &BTreeMap<String, Certainty>,
) -> bool {
    if o_e.is_zero() {
        return false;
    }
    if beh.alpha != 0.0 {
        return true;
    }
    beh.couplings
        .keys()
        .any(|kind| o_s.get(kind).map(|c| !c.is_zero()).unwrap_or(false))
}

/// Drive-level feedback state: the current `o_d` signal and its decay
/// factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveState {
    pub drive_id: String,
    /// Current feedback signal `o_d`.
    pub value: Certainty,
    /// Fraction of the previous congruent carried forward, in `[0, 1)`.
    pub lambda: f64,
}

impl DriveState {
    pub fn new(drive_id: impl Into<String>, lambda: f64) -> Result<Self> {
        let drive_id = drive_id.into();
        if !(lambda.is_finite() && (0.0..1.0).contains(&lambda)) {
            return Err(Error::config(format!(
                "drive {drive_id}: lambda {lambda} outside [0, 1)"
            )));
        }
        Ok(DriveState {
            drive_id,
            value: Certainty::ZERO,
            lambda,
        })
    }
}

/// Next feedback signal: an echo of the previous congruent while the need
/// persists, zero the moment the internal perception vanishes. The zeroing
/// is what lets a satisfied drive's activity drop to exactly 0 even when
/// its stimuli are still in view.
pub fn update_drive(d: &DriveState, prev_congruent: Certainty, o_e_now: Certainty) -> DriveState {
    let value = if o_e_now.value() > 0.0 {
        Certainty::clamped(d.lambda * prev_congruent.value())
    } else {
        Certainty::ZERO
    };
    DriveState {
        drive_id: d.drive_id.clone(),
        value,
        lambda: d.lambda,
    }
}

/// One congruent: a drive's clamped activity value this cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongruentElement {
    pub drive_id: String,
    pub certainty: Certainty,
    pub tick: u64,
}

/// Winner-take-all over congruents: highest certainty wins, ties go to the
/// lexicographically first drive id, and nothing wins when every certainty
/// is zero.
pub fn select_consummatory_preference(congruents: &[CongruentElement]) -> Option<&str> {
    congruents
        .iter()
        .filter(|c| !c.certainty.is_zero())
        .max_by(|a, b| {
            a.certainty
                .value()
                .total_cmp(&b.certainty.value())
                .then_with(|| b.drive_id.cmp(&a.drive_id))
        })
        .map(|c| c.drive_id.as_str())
}

/// Build the congruence internal behaviour: one rule per drive that
/// refreshes the drive-level feedback from the previous congruent, then
/// posts the new congruent (or retracts it while the firing condition is
/// false). Runs every rule each cycle; this behaviour competes through no
/// REACs.
pub fn congruence_behaviour(drives: &[CongruenceBehaviour], lambda: f64) -> InternalBehaviour {
    let rules = drives
        .iter()
        .map(|beh| {
            let beh = beh.clone();
            let base = DriveState {
                drive_id: beh.drive_id.clone(),
                value: Certainty::ZERO,
                lambda,
            };
            ElementaryBehaviour::new(beh.drive_id.clone(), Condition::Always, move |scope| {
                let o_e = scope
                    .element(LevelId::Mot(MotLevel::InternalPerceptions), &beh.drive_id)
                    .map(|e| e.certainty)
                    .unwrap_or(Certainty::ZERO);
                let o_s: BTreeMap<String, Certainty> = beh
                    .couplings
                    .keys()
                    .filter_map(|kind| {
                        scope
                            .element(LevelId::Mot(MotLevel::ExternalPerceptions), kind)
                            .map(|e| (kind.clone(), e.certainty))
                    })
                    .collect();
                let prev = scope
                    .element(LevelId::Mot(MotLevel::Congruents), &beh.drive_id)
                    .map(|e| e.certainty)
                    .unwrap_or(Certainty::ZERO);

                let d = update_drive(&base, prev, o_e);
                let mut writes = vec![Write::post(
                    LevelId::Mot(MotLevel::Drive),
                    beh.drive_id.clone(),
                    d.value,
                )];
                if congruence_condition(&beh, o_e, &o_s) {
                    let raw = evaluate_congruence(&beh, o_e, &o_s, d.value);
                    writes.push(Write::Post {
                        level: LevelId::Mot(MotLevel::Congruents),
                        id: beh.drive_id.clone(),
                        certainty: Certainty::clamped(raw),
                        attrs: [(RAW_ATTR.to_string(), raw)].into(),
                    });
                } else {
                    writes.push(Write::Retract {
                        level: LevelId::Mot(MotLevel::Congruents),
                        id: beh.drive_id.clone(),
                    });
                }
                writes
            })
        })
        .collect();
    InternalBehaviour {
        id: "congruence".into(),
        uses_reac: false,
        rules,
    }
}

/// Build the consummatory-preferences selector: one REAC-registering rule
/// per drive, so the control mechanism's max-activation firing is the
/// competition. The winning rule hands `(drive_id, activity)` to the
/// transmitter toward the cognitive node.
pub fn preference_selector(
    drives: &[CongruenceBehaviour],
    channel: ChannelId,
) -> InternalBehaviour {
    let rules = drives
        .iter()
        .map(|beh| {
            let drive_id = beh.drive_id.clone();
            let condition = Condition::All(vec![ConditionClause {
                level: LevelId::Mot(MotLevel::Congruents),
                ids: IdPattern::Exact(drive_id.clone()),
                test: CertaintyTest::NonZero,
                required: true,
            }]);
            ElementaryBehaviour::new(drive_id.clone(), condition, move |scope| {
                let Some(c) = scope.element(LevelId::Mot(MotLevel::Congruents), &drive_id) else {
                    return Vec::new();
                };
                vec![Write::Transmit {
                    channel,
                    level: LevelId::Cog(CogLevel::ConsummatoryPreferents),
                    id: drive_id.clone(),
                    certainty: c.certainty,
                    attrs: BTreeMap::new(),
                }]
            })
        })
        .collect();
    InternalBehaviour {
        id: "consummatory-preferences".into(),
        uses_reac: true,
        rules,
    }
}
