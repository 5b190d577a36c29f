//! Scenario files: one TOML document describing the network parameters,
//! the world, the run length and seeds, and optionally a reaction-time
//! query to evaluate against the resulting trace.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::animat::{ObjectKind, WorldConfig};
use crate::cognitive::ActionKind;
use crate::error::{Error, Result};
use crate::network::NetworkConfig;

fn default_max_ticks() -> u64 {
    1000
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_max_ticks")]
    pub max_ticks: u64,
    /// Base seeds; sweeps derive repeat seeds from the first one.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_ticks: default_max_ticks(),
            seeds: default_seeds(),
        }
    }
}

/// Reaction-time query: ticks from the first appearance of `stimulus` in
/// the world to the first selection of `target_action`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtimeQuery {
    pub stimulus: String,
    pub target_action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub network: NetworkConfig,
    pub world: WorldConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtime: Option<RtimeQuery>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Scenario> {
        let mut scenario: Scenario = toml::from_str(text)
            .map_err(|e| Error::load("scenario", e.message().trim().to_string()))?;
        // The network's contact range is the single source of truth.
        scenario.world.contact_range = scenario.network.contact_range;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::load(path.display().to_string(), e.to_string()))?;
        Scenario::from_toml(&text).map_err(|e| match e {
            Error::Load { field, reason } if field == "scenario" => Error::Load {
                field: path.display().to_string(),
                reason,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::load("name", "must not be empty"));
        }
        for d in &self.network.drives {
            if self.world.animat.drive_value(&d.id).is_none() {
                return Err(Error::load(
                    format!("network.drives.{}", d.id),
                    "not an animat need (hunger, thirst, fatigue)",
                ));
            }
            for kind in d.couplings.keys() {
                ObjectKind::parse_kind(kind).map_err(|_| {
                    Error::load(
                        format!("network.drives.{}.couplings.{kind}", d.id),
                        "not an object kind",
                    )
                })?;
            }
        }
        if self.run.max_ticks == 0 {
            return Err(Error::load("run.max_ticks", "must be positive"));
        }
        if self.run.seeds.is_empty() {
            return Err(Error::load("run.seeds", "at least one seed required"));
        }
        if let Some(q) = &self.rtime {
            ObjectKind::parse_kind(&q.stimulus)
                .map_err(|_| Error::load("rtime.stimulus", "not an object kind"))?;
            ActionKind::parse(&q.target_action)
                .map_err(|_| Error::load("rtime.target_action", "not an action id"))?;
        }
        Ok(())
    }

    /// Replace the network-wide blending factor; per-drive overrides keep
    /// their explicit values.
    pub fn with_alpha(mut self, alpha: f64) -> Scenario {
        self.network.alpha = alpha;
        self
    }
}
