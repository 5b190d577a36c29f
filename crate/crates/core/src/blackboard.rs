//! Blackboard node kernel: certainty-tagged solution elements arranged in
//! named levels, production rules packaged into internal behaviours, REAC
//! activation registers for rule competition, and transmitter/receptor
//! channels between nodes.
//!
//! The kernel is policy-free. Which behaviours exist, in what order they
//! fire, and when channels flush is decided by the caller (see
//! [`crate::network`] for the assembled two-node network).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confidence value in `[0, 1]`. The only way to construct one outside the
/// range is rejected or clamped, so arithmetic downstream never sees a
/// certainty outside the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Certainty(f64);

impl Certainty {
    pub const ZERO: Certainty = Certainty(0.0);
    pub const ONE: Certainty = Certainty(1.0);

    /// Clamp into `[0, 1]`. Non-finite input collapses to 0.
    pub fn clamped(v: f64) -> Self {
        if v.is_finite() {
            Certainty(v.clamp(0.0, 1.0))
        } else {
            Certainty(0.0)
        }
    }

    /// Accept only finite values already in `[0, 1]`.
    pub fn checked(v: f64) -> Result<Self> {
        if v.is_finite() && (0.0..=1.0).contains(&v) {
            Ok(Certainty(v))
        } else {
            Err(Error::input(format!("certainty {v} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

impl TryFrom<f64> for Certainty {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Certainty::checked(v)
    }
}

impl From<Certainty> for f64 {
    fn from(c: Certainty) -> f64 {
        c.0
    }
}

impl fmt::Display for Certainty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeId {
    Cognitive,
    Motivational,
}

/// Levels of the cognitive node, ordered from sensing toward acting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CogLevel {
    ExternalPerceptions,
    PerceptualPersistents,
    ConsummatoryPreferents,
    DrivePerceptionCongruents,
    PotentialActions,
    Actions,
}

/// Levels of the motivational node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotLevel {
    InternalPerceptions,
    ExternalPerceptions,
    Congruents,
    Drive,
}

/// A level address. Constructible only from the fixed per-node level sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LevelId {
    Cog(CogLevel),
    Mot(MotLevel),
}

impl LevelId {
    pub fn node(self) -> NodeId {
        match self {
            LevelId::Cog(_) => NodeId::Cognitive,
            LevelId::Mot(_) => NodeId::Motivational,
        }
    }
}

impl fmt::Display for LevelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            LevelId::Cog(CogLevel::ExternalPerceptions) => "cognitive/external-perceptions",
            LevelId::Cog(CogLevel::PerceptualPersistents) => "cognitive/perceptual-persistents",
            LevelId::Cog(CogLevel::ConsummatoryPreferents) => "cognitive/consummatory-preferents",
            LevelId::Cog(CogLevel::DrivePerceptionCongruents) => {
                "cognitive/drive-perception-congruents"
            }
            LevelId::Cog(CogLevel::PotentialActions) => "cognitive/potential-actions",
            LevelId::Cog(CogLevel::Actions) => "cognitive/actions",
            LevelId::Mot(MotLevel::InternalPerceptions) => "motivational/internal-perceptions",
            LevelId::Mot(MotLevel::ExternalPerceptions) => "motivational/external-perceptions",
            LevelId::Mot(MotLevel::Congruents) => "motivational/congruents",
            LevelId::Mot(MotLevel::Drive) => "motivational/drive",
        };
        f.write_str(name)
    }
}

impl NodeId {
    pub fn levels(self) -> &'static [LevelId] {
        const COG: [LevelId; 6] = [
            LevelId::Cog(CogLevel::ExternalPerceptions),
            LevelId::Cog(CogLevel::PerceptualPersistents),
            LevelId::Cog(CogLevel::ConsummatoryPreferents),
            LevelId::Cog(CogLevel::DrivePerceptionCongruents),
            LevelId::Cog(CogLevel::PotentialActions),
            LevelId::Cog(CogLevel::Actions),
        ];
        const MOT: [LevelId; 4] = [
            LevelId::Mot(MotLevel::InternalPerceptions),
            LevelId::Mot(MotLevel::ExternalPerceptions),
            LevelId::Mot(MotLevel::Congruents),
            LevelId::Mot(MotLevel::Drive),
        ];
        match self {
            NodeId::Cognitive => &COG,
            NodeId::Motivational => &MOT,
        }
    }
}

/// One assertion on a blackboard level. Ids are unique per level; posting
/// the same id again replaces the previous element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionElement {
    pub id: String,
    pub level: LevelId,
    pub certainty: Certainty,
    /// Cycle index at which the element was (re)written.
    pub tick: u64,
    /// Small numeric payload (bearing, distance, age, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IdPattern {
    Exact(String),
    AnyOf(Vec<String>),
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CertaintyTest {
    Any,
    NonZero,
}

/// One pattern over a level. `required` clauses must bind at least one
/// qualifying element for the rule to match; optional clauses just expose
/// whatever is present.
#[derive(Debug, Clone)]
pub struct ConditionClause {
    pub level: LevelId,
    pub ids: IdPattern,
    pub test: CertaintyTest,
    pub required: bool,
}

#[derive(Debug, Clone)]
pub enum Condition {
    /// Matches every cycle.
    Always,
    All(Vec<ConditionClause>),
}

/// Effect of a fired rule. Rules may write to their own node's levels or
/// hand an element to a transmitter channel; nothing else.
#[derive(Debug, Clone, PartialEq)]
pub enum Write {
    Post {
        level: LevelId,
        id: String,
        certainty: Certainty,
        attrs: BTreeMap<String, f64>,
    },
    Retract {
        level: LevelId,
        id: String,
    },
    Transmit {
        channel: ChannelId,
        level: LevelId,
        id: String,
        certainty: Certainty,
        attrs: BTreeMap<String, f64>,
    },
}

impl Write {
    pub fn post(level: LevelId, id: impl Into<String>, certainty: Certainty) -> Self {
        Write::Post {
            level,
            id: id.into(),
            certainty,
            attrs: BTreeMap::new(),
        }
    }

    fn written_certainty(&self) -> Option<Certainty> {
        match self {
            Write::Post { certainty, .. } | Write::Transmit { certainty, .. } => Some(*certainty),
            Write::Retract { .. } => None,
        }
    }
}

/// Read-only view a rule action gets: the owning node's levels, the
/// elements its condition bound, and the current cycle.
pub struct RuleScope<'a> {
    node: &'a NodeState,
    bound: &'a [(LevelId, String)],
    cycle: u64,
}

impl<'a> RuleScope<'a> {
    pub fn elements(&self, level: LevelId) -> Vec<&'a SolutionElement> {
        self.node.read_elements(level, None).unwrap_or_default()
    }

    pub fn element(&self, level: LevelId, id: &str) -> Option<&'a SolutionElement> {
        self.node.element(level, id)
    }

    pub fn bound(&self) -> &[(LevelId, String)] {
        self.bound
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }
}

pub type ActionFn = Arc<dyn Fn(&RuleScope<'_>) -> Vec<Write> + Send + Sync>;

/// Production rule: a condition over blackboard state and an action that
/// produces writes. Actions must be pure functions of the scope.
pub struct ElementaryBehaviour {
    pub id: String,
    pub condition: Condition,
    pub action: ActionFn,
}

impl ElementaryBehaviour {
    pub fn new(
        id: impl Into<String>,
        condition: Condition,
        action: impl Fn(&RuleScope<'_>) -> Vec<Write> + Send + Sync + 'static,
    ) -> Self {
        ElementaryBehaviour {
            id: id.into(),
            condition,
            action: Arc::new(action),
        }
    }
}

impl fmt::Debug for ElementaryBehaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ElementaryBehaviour")
            .field("id", &self.id)
            .field("condition", &self.condition)
            .finish_non_exhaustive()
    }
}

/// Ordered bundle of rules fired as one unit. With `uses_reac`, every
/// matching rule registers a REAC and only the strongest fires; without,
/// each matching rule fires directly in declaration order.
#[derive(Debug)]
pub struct InternalBehaviour {
    pub id: String,
    pub uses_reac: bool,
    pub rules: Vec<ElementaryBehaviour>,
}

/// Activation register: a rule that matched this cycle, tagged with the
/// certainty its action would write.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reac {
    pub behaviour_id: String,
    pub rule_id: String,
    pub activation: Certainty,
    pub bound_elements: Vec<(LevelId, String)>,
    pub tick: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelId(pub usize);

/// One-directional link between two nodes. Elements written to a mapped
/// source level are queued on flush and posted to the destination level
/// when the receiver next starts a cycle; rules may also hand elements to
/// the channel directly.
#[derive(Debug, Clone)]
pub struct Channel {
    pub id: ChannelId,
    pub sender: NodeId,
    pub receiver: NodeId,
    pub level_map: BTreeMap<LevelId, LevelId>,
    pending: Vec<SolutionElement>,
}

#[derive(Debug, Clone, Default)]
pub struct ChannelRegistry {
    channels: Vec<Channel>,
}

impl ChannelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wire `sender` to `receiver`. Every key of `level_map` must be a
    /// sender level and every value a receiver level.
    pub fn connect(
        &mut self,
        sender: &mut NodeState,
        receiver: &mut NodeState,
        level_map: BTreeMap<LevelId, LevelId>,
    ) -> Result<ChannelId> {
        if sender.id == receiver.id {
            return Err(Error::structural("channel endpoints must differ"));
        }
        for (src, dst) in &level_map {
            if src.node() != sender.id {
                return Err(Error::structural(format!(
                    "source level {src} does not belong to {:?}",
                    sender.id
                )));
            }
            if dst.node() != receiver.id {
                return Err(Error::structural(format!(
                    "destination level {dst} does not belong to {:?}",
                    receiver.id
                )));
            }
        }
        let id = ChannelId(self.channels.len());
        self.channels.push(Channel {
            id,
            sender: sender.id,
            receiver: receiver.id,
            level_map,
            pending: Vec::new(),
        });
        sender.transmitters.push(id);
        receiver.receptors.push(id);
        Ok(id)
    }

    pub fn channel(&self, id: ChannelId) -> Option<&Channel> {
        self.channels.get(id.0)
    }

    /// Drain everything queued for `node` into its levels. Each queued
    /// element is delivered exactly once.
    pub fn deliver(&mut self, node: &mut NodeState) -> Result<()> {
        for ch in &mut self.channels {
            if ch.receiver != node.id {
                continue;
            }
            for elem in ch.pending.drain(..) {
                node.post(elem)?;
            }
        }
        Ok(())
    }

    fn enqueue(&mut self, from: NodeId, write: Write, cycle: u64) -> Result<()> {
        let Write::Transmit {
            channel,
            level,
            id,
            certainty,
            attrs,
        } = write
        else {
            return Err(Error::structural("enqueue expects a transmit write"));
        };
        let ch = self
            .channels
            .get_mut(channel.0)
            .ok_or_else(|| Error::structural(format!("unknown channel {channel:?}")))?;
        if ch.sender != from {
            return Err(Error::structural(format!(
                "node {from:?} does not own channel {channel:?}"
            )));
        }
        if level.node() != ch.receiver {
            return Err(Error::structural(format!(
                "transmit target {level} is not on the receiving node"
            )));
        }
        ch.pending.push(SolutionElement {
            id,
            level,
            certainty,
            tick: cycle,
            attrs,
        });
        Ok(())
    }
}

/// Serializable view of a node's data (levels and REACs), used for
/// determinism checks and debugging. Behaviour closures are not part of
/// the state proper and are omitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSnapshot {
    pub id: NodeId,
    pub cycle: u64,
    pub levels: BTreeMap<String, Vec<SolutionElement>>,
    pub reacs: Vec<Reac>,
}

/// One blackboard node: its level contents, its behaviours in firing
/// order, this cycle's REACs, and its channel endpoints.
pub struct NodeState {
    pub id: NodeId,
    levels: BTreeMap<LevelId, BTreeMap<String, SolutionElement>>,
    behaviours: Vec<Arc<InternalBehaviour>>,
    reacs: Vec<Reac>,
    transmitters: Vec<ChannelId>,
    receptors: Vec<ChannelId>,
    cycle: u64,
    journal: Vec<(LevelId, String)>,
}

impl fmt::Debug for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NodeState")
            .field("id", &self.id)
            .field("cycle", &self.cycle)
            .field("levels", &self.levels)
            .field("reacs", &self.reacs)
            .finish_non_exhaustive()
    }
}

impl Clone for NodeState {
    fn clone(&self) -> Self {
        NodeState {
            id: self.id,
            levels: self.levels.clone(),
            behaviours: self.behaviours.clone(),
            reacs: self.reacs.clone(),
            transmitters: self.transmitters.clone(),
            receptors: self.receptors.clone(),
            cycle: self.cycle,
            journal: self.journal.clone(),
        }
    }
}

impl NodeState {
    pub fn new(id: NodeId) -> Self {
        let levels = id.levels().iter().map(|&l| (l, BTreeMap::new())).collect();
        NodeState {
            id,
            levels,
            behaviours: Vec::new(),
            reacs: Vec::new(),
            transmitters: Vec::new(),
            receptors: Vec::new(),
            cycle: 0,
            journal: Vec::new(),
        }
    }

    pub fn cognitive() -> Self {
        NodeState::new(NodeId::Cognitive)
    }

    pub fn motivational() -> Self {
        NodeState::new(NodeId::Motivational)
    }

    pub fn add_behaviour(&mut self, behaviour: InternalBehaviour) -> usize {
        self.behaviours.push(Arc::new(behaviour));
        self.behaviours.len() - 1
    }

    pub fn behaviour_count(&self) -> usize {
        self.behaviours.len()
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn set_cycle(&mut self, cycle: u64) {
        self.cycle = cycle;
    }

    pub fn reacs(&self) -> &[Reac] {
        &self.reacs
    }

    pub fn clear_reacs(&mut self) {
        self.reacs.clear();
    }

    fn level_mut(&mut self, level: LevelId) -> Result<&mut BTreeMap<String, SolutionElement>> {
        if level.node() != self.id {
            return Err(Error::structural(format!(
                "level {level} does not belong to {:?}",
                self.id
            )));
        }
        Ok(self.levels.get_mut(&level).expect("level set is fixed"))
    }

    /// Create or replace an element. The stored tick is the node's current
    /// cycle regardless of what the caller stamped.
    pub fn post(&mut self, mut elem: SolutionElement) -> Result<()> {
        elem.tick = self.cycle;
        let level = elem.level;
        let id = elem.id.clone();
        self.level_mut(level)?.insert(id.clone(), elem);
        self.journal.push((level, id));
        Ok(())
    }

    pub fn post_element(
        &mut self,
        level: LevelId,
        id: impl Into<String>,
        certainty: Certainty,
        attrs: BTreeMap<String, f64>,
    ) -> Result<()> {
        self.post(SolutionElement {
            id: id.into(),
            level,
            certainty,
            tick: 0,
            attrs,
        })
    }

    pub fn retract(&mut self, level: LevelId, id: &str) -> Result<bool> {
        Ok(self.level_mut(level)?.remove(id).is_some())
    }

    pub fn clear_level(&mut self, level: LevelId) -> Result<()> {
        self.level_mut(level)?.clear();
        Ok(())
    }

    /// Elements of a level in lexicographic id order, optionally filtered
    /// to one exact id.
    pub fn read_elements(
        &self,
        level: LevelId,
        id_filter: Option<&str>,
    ) -> Result<Vec<&SolutionElement>> {
        if level.node() != self.id {
            return Err(Error::structural(format!(
                "level {level} does not belong to {:?}",
                self.id
            )));
        }
        let map = self.levels.get(&level).expect("level set is fixed");
        Ok(match id_filter {
            Some(id) => map.get(id).into_iter().collect(),
            None => map.values().collect(),
        })
    }

    pub fn element(&self, level: LevelId, id: &str) -> Option<&SolutionElement> {
        self.levels.get(&level).and_then(|m| m.get(id))
    }

    fn match_condition(&self, cond: &Condition) -> Option<Vec<(LevelId, String)>> {
        match cond {
            Condition::Always => Some(Vec::new()),
            Condition::All(clauses) => {
                let mut bound = Vec::new();
                for clause in clauses {
                    let map = self.levels.get(&clause.level)?;
                    let candidates: Vec<&SolutionElement> = match &clause.ids {
                        IdPattern::Exact(id) => map.get(id).into_iter().collect(),
                        IdPattern::AnyOf(ids) => {
                            let mut ids = ids.clone();
                            ids.sort();
                            ids.iter().filter_map(|i| map.get(i)).collect()
                        }
                        IdPattern::Any => map.values().collect(),
                    };
                    let qualifying: Vec<&SolutionElement> = candidates
                        .into_iter()
                        .filter(|e| match clause.test {
                            CertaintyTest::Any => true,
                            CertaintyTest::NonZero => !e.certainty.is_zero(),
                        })
                        .collect();
                    if clause.required && qualifying.is_empty() {
                        return None;
                    }
                    bound.extend(qualifying.iter().map(|e| (clause.level, e.id.clone())));
                }
                Some(bound)
            }
        }
    }

    fn commit(&mut self, writes: Vec<Write>, reg: &mut ChannelRegistry) -> Result<()> {
        for write in writes {
            match write {
                Write::Post {
                    level,
                    id,
                    certainty,
                    attrs,
                } => self.post_element(level, id, certainty, attrs)?,
                Write::Retract { level, id } => {
                    self.retract(level, &id)?;
                }
                w @ Write::Transmit { .. } => reg.enqueue(self.id, w, self.cycle)?,
            }
        }
        Ok(())
    }

    /// Evaluate one internal behaviour. Without REACs every matching rule
    /// fires in order; with REACs all matching rules register and only the
    /// strongest activation fires (ties broken by lexicographic rule id).
    pub fn fire_behaviour(&mut self, index: usize, reg: &mut ChannelRegistry) -> Result<()> {
        let behaviour = self
            .behaviours
            .get(index)
            .ok_or_else(|| Error::structural(format!("no behaviour at index {index}")))?
            .clone();

        if !behaviour.uses_reac {
            for rule in &behaviour.rules {
                let Some(bound) = self.match_condition(&rule.condition) else {
                    continue;
                };
                let writes = {
                    let scope = RuleScope {
                        node: self,
                        bound: &bound,
                        cycle: self.cycle,
                    };
                    (rule.action)(&scope)
                };
                self.commit(writes, reg)?;
            }
            return Ok(());
        }

        // REAC pass: dry-run matching rules, register activations, then
        // commit only the winner's writes.
        let mut staged: Vec<(String, f64, Vec<Write>)> = Vec::new();
        for rule in &behaviour.rules {
            let Some(bound) = self.match_condition(&rule.condition) else {
                continue;
            };
            let writes = {
                let scope = RuleScope {
                    node: self,
                    bound: &bound,
                    cycle: self.cycle,
                };
                (rule.action)(&scope)
            };
            let activation = writes
                .iter()
                .filter_map(Write::written_certainty)
                .fold(Certainty::ZERO, |acc, c| if c > acc { c } else { acc });
            self.reacs.push(Reac {
                behaviour_id: behaviour.id.clone(),
                rule_id: rule.id.clone(),
                activation,
                bound_elements: bound,
                tick: self.cycle,
            });
            staged.push((rule.id.clone(), activation.value(), writes));
        }

        // Highest activation wins; on a tie the lexicographically first
        // rule id does.
        let winner = staged
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        if let Some((i, _)) = winner {
            let (_, _, writes) = staged.swap_remove(i);
            self.commit(writes, reg)?;
        }
        Ok(())
    }

    /// Copy every element written since the last flush whose level is
    /// mapped by one of this node's transmitter channels into that
    /// channel's queue, retargeted to the destination level.
    pub fn flush_emissions(&mut self, reg: &mut ChannelRegistry) -> Result<()> {
        let journal = std::mem::take(&mut self.journal);
        let mut seen: Vec<(LevelId, String)> = Vec::new();
        for entry in journal {
            if seen.contains(&entry) {
                continue;
            }
            seen.push(entry);
        }
        for &tid in &self.transmitters {
            let ch = reg
                .channels
                .get(tid.0)
                .ok_or_else(|| Error::structural(format!("unknown channel {tid:?}")))?;
            let routes: Vec<(LevelId, LevelId, String)> = seen
                .iter()
                .filter_map(|(level, id)| {
                    ch.level_map
                        .get(level)
                        .map(|&dst| (*level, dst, id.clone()))
                })
                .collect();
            for (src, dst, id) in routes {
                // Element may have been retracted after the write; skip.
                let Some(elem) = self.element(src, &id) else {
                    continue;
                };
                let mut out = elem.clone();
                out.level = dst;
                reg.channels[tid.0].pending.push(out);
            }
        }
        Ok(())
    }

    /// One full node cycle: bump the cycle counter, clear REACs, take
    /// channel deliveries and direct inputs, fire every behaviour in
    /// declared order, then flush emissions to transmitters.
    pub fn run_cycle(
        &mut self,
        inputs: &[SolutionElement],
        reg: &mut ChannelRegistry,
    ) -> Result<()> {
        self.cycle += 1;
        self.reacs.clear();
        reg.deliver(self)?;
        for input in inputs {
            self.post(input.clone())?;
        }
        for i in 0..self.behaviours.len() {
            self.fire_behaviour(i, reg)?;
        }
        self.flush_emissions(reg)
    }

    pub fn snapshot(&self) -> NodeSnapshot {
        NodeSnapshot {
            id: self.id,
            cycle: self.cycle,
            levels: self
                .levels
                .iter()
                .map(|(l, m)| (l.to_string(), m.values().cloned().collect()))
                .collect(),
            reacs: self.reacs.clone(),
        }
    }
}
