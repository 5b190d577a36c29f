//! Action selection for simulated creatures, built on two communicating
//! blackboard nodes: a cognitive node that turns percepts into an external
//! action, and a motivational node that turns internal needs into a
//! consummatory preference. The coupling strength between internal and
//! external signals is a single parameter `alpha`; at 0 a need is only
//! pursued when a matching stimulus is perceived, above 0 the need alone
//! can drive goal-directed exploration.
//!
//! The crate ships the node kernel ([`blackboard`]), the two node
//! definitions ([`motivational`], [`cognitive`]), the assembled network
//! ([`network`]), a 2D world with a single animat ([`animat`]), and a
//! scenario/trace harness ([`harness`]) behind the `ibenet` CLI.

pub mod animat;
pub mod blackboard;
pub mod cognitive;
pub mod error;
pub mod harness;
pub mod motivational;
pub mod network;
pub mod scenario;
pub mod trace;

pub use animat::{
    ActionOutcome, AnimatState, ObjectKind, WorldConfig, WorldEvent, WorldObject, WorldState,
};
pub use blackboard::{Certainty, LevelId, NodeId, NodeState, SolutionElement};
pub use cognitive::{ActionKind, ActionSource, Percept, PersistentPercept, PotentialAction};
pub use error::Error;
pub use harness::{measure_rtime, run_scenario, sweep_alpha, RtimeResult, SweepRow, SweepSummary};
pub use motivational::{CongruenceBehaviour, CongruentElement, DriveState};
pub use network::{CycleReport, DriveConfig, Network, NetworkConfig, Preference, SensorFrame};
pub use scenario::{RtimeQuery, RunConfig, Scenario};
pub use trace::{TickRecord, Trace};
