//! Run traces: one JSON object per tick, one tick per line. Serialization
//! is byte-stable for identical runs, so traces can be diffed directly.

use std::collections::BTreeMap;
use std::io::Write as IoWrite;

use serde::{Deserialize, Serialize};

use crate::animat::ActionOutcome;
use crate::cognitive::{Percept, PotentialAction};
use crate::error::{Error, Result};
use crate::network::{CongruentValue, Preference};

/// Everything observable about one tick: the sensed state going in, the
/// network's decision, and what executing it did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    /// Pose at sensing time, before the action moved the animat.
    pub position: [f64; 2],
    pub heading: f64,
    /// Internal perceptions per configured drive.
    pub internal: BTreeMap<String, f64>,
    pub strength: f64,
    pub lucidity: f64,
    pub percepts: Vec<Percept>,
    /// Object kinds present in the world, perceivable or not.
    pub world_kinds: Vec<String>,
    pub congruents: BTreeMap<String, CongruentValue>,
    pub drive_feedback: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference: Option<Preference>,
    pub candidates: Vec<PotentialAction>,
    pub selected: PotentialAction,
    pub outcome: ActionOutcome,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TickRecord>,
}

impl Trace {
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).map_err(|e| Error::structural(e.to_string()))?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_json_lines(&self, w: &mut impl IoWrite) -> Result<()> {
        w.write_all(self.to_json_lines()?.as_bytes())?;
        Ok(())
    }

    pub fn from_json_lines(text: &str) -> Result<Trace> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::input(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trace { records })
    }
}
