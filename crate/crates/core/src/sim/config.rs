//! Scenario configuration and validation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_core::RngCore;
use thiserror::Error;

use super::rng::unit_f64;
use crate::confidence::ControlModel;
use crate::opinion::NodeId;
use crate::score::{
    GompertzParams, PrivilegeLevel, PropertyWeights, RelevanceGrade, ScoreError,
    DEFAULT_FAMILIARITY_CURVE, DEFAULT_GAP_CURVE, DEFAULT_INTERACTION_THRESHOLD,
    DEFAULT_RESPONSE_CURVE,
};

/// A malformed scenario, with every violated invariant listed.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid scenario: {}", violations.join("; "))]
pub struct ValidationError {
    pub violations: Vec<String>,
}

/// How long a responder takes to answer, in hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayDistribution {
    Fixed(f64),
    Uniform { low: f64, high: f64 },
    Exponential { mean: f64 },
}

impl DelayDistribution {
    pub(crate) fn sample(&self, rng: &mut impl RngCore) -> f64 {
        match *self {
            DelayDistribution::Fixed(hours) => hours,
            DelayDistribution::Uniform { low, high } => low + unit_f64(rng) * (high - low),
            DelayDistribution::Exponential { mean } => -mean * libm::log(1.0 - unit_f64(rng)),
        }
    }

    fn check(&self, errs: &mut Vec<String>, node: &NodeId) {
        let bad = match *self {
            DelayDistribution::Fixed(hours) => !(hours.is_finite() && hours >= 0.0),
            DelayDistribution::Uniform { low, high } => {
                !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high)
            }
            DelayDistribution::Exponential { mean } => !(mean.is_finite() && mean >= 0.0),
        };
        if bad {
            errs.push(format!("node {node}: response delay parameters must be nonnegative"));
        }
    }
}

/// Probabilities over the five relevance grades, in grade order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceDistribution([f64; 5]);

impl RelevanceDistribution {
    pub fn new(probabilities: [f64; 5]) -> Result<Self, ScoreError> {
        let sum: f64 = probabilities.iter().sum();
        let ok = probabilities.iter().all(|p| p.is_finite() && *p >= 0.0);
        if !ok || (sum - 1.0).abs() > 1e-9 {
            return Err(ScoreError::InvalidWeights { sum });
        }
        Ok(Self(probabilities))
    }

    /// Every response graded with the same fixed level.
    pub fn always(grade: RelevanceGrade) -> Self {
        let mut p = [0.0; 5];
        p[grade as usize] = 1.0;
        Self(p)
    }

    pub fn probabilities(&self) -> &[f64; 5] {
        &self.0
    }

    pub(crate) fn sample(&self, rng: &mut impl RngCore) -> RelevanceGrade {
        let u = unit_f64(rng);
        let mut cumulative = 0.0;
        for (grade, p) in RelevanceGrade::ALL.iter().zip(self.0) {
            cumulative += p;
            if u < cumulative {
                return *grade;
            }
        }
        RelevanceGrade::FullyRelevant
    }
}

/// How a node behaves when asked for data or opinions.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorProfile {
    /// Probability of answering any given request.
    pub respond_probability: f64,
    pub response_delay: DelayDistribution,
    /// How the requester will grade the relevance of this node's responses.
    pub relevance_distribution: RelevanceDistribution,
    /// Privilege level granted to requesters without an override.
    pub granted: PrivilegeLevel,
    /// Per-requester granted level, on the same scale as `granted`.
    pub granted_overrides: BTreeMap<NodeId, i64>,
}

impl BehaviorProfile {
    /// The privilege level this node grants `requester`.
    pub fn granted_for(&self, requester: &NodeId) -> PrivilegeLevel {
        match self.granted_overrides.get(requester) {
            Some(&level) => self
                .granted
                .with_level(level)
                .expect("granted override validated with the scenario"),
            None => self.granted,
        }
    }
}

/// One node's full configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeConfig {
    pub id: NodeId,
    pub weights: PropertyWeights,
    pub response_curve: GompertzParams,
    pub gap_curve: GompertzParams,
    pub familiarity_curve: GompertzParams,
    /// Positive/negative classification threshold for interactions.
    pub interaction_threshold: f64,
    /// Interactions needed before the node trusts its own opinion alone.
    pub t_min: u32,
    pub control: ControlModel,
    /// Per-trustee control models; the base model applies otherwise.
    pub control_overrides: BTreeMap<NodeId, ControlModel>,
    /// Confidence level above which data is shared, on the [-1,2] scale.
    pub disclosure_threshold: f64,
    /// Window for collecting responses, data and opinion rounds alike.
    pub wait_hours: f64,
    /// Fresh requests sent after a timeout.
    pub retry_count: u32,
    pub behavior: BehaviorProfile,
}

impl NodeConfig {
    /// A node with the stock curve constants, weights and control model.
    pub fn with_defaults(
        id: NodeId,
        t_min: u32,
        disclosure_threshold: f64,
        wait_hours: f64,
        behavior: BehaviorProfile,
    ) -> Self {
        Self {
            id,
            weights: PropertyWeights::default(),
            response_curve: DEFAULT_RESPONSE_CURVE,
            gap_curve: DEFAULT_GAP_CURVE,
            familiarity_curve: DEFAULT_FAMILIARITY_CURVE,
            interaction_threshold: DEFAULT_INTERACTION_THRESHOLD,
            t_min,
            control: ControlModel::default(),
            control_overrides: BTreeMap::new(),
            disclosure_threshold,
            wait_hours,
            retry_count: 0,
            behavior,
        }
    }
}

/// What a scheduled actor does.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Ask `target` for data; the response (if any) becomes an interaction.
    DataRequest { target: NodeId },
    /// Collect community opinions about `target` and assess trust.
    TrustQuery { target: NodeId },
    /// Like [`Action::TrustQuery`], then decide disclosure via confidence.
    ConfidenceQuery { target: NodeId },
}

impl Action {
    pub fn target(&self) -> &NodeId {
        match self {
            Action::DataRequest { target }
            | Action::TrustQuery { target }
            | Action::ConfidenceQuery { target } => target,
        }
    }
}

/// One scheduled action.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleItem {
    /// Simulation hours.
    pub time: f64,
    pub actor: NodeId,
    pub action: Action,
}

/// A complete simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<NodeConfig>,
    /// Must be sorted ascending by time; ties keep their listed order.
    pub schedule: Vec<ScheduleItem>,
    pub horizon_hours: f64,
    pub seed: u64,
    /// When set, opinion responses are scored and ledgered like data
    /// responses (graded fully relevant, at the reporter's granted level).
    pub score_opinion_responses: bool,
}

fn id_charset_ok(id: &NodeId) -> bool {
    id.as_str()
        .bytes()
        .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.')
}

impl Scenario {
    /// Check every invariant, reporting all violations at once.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut errs = Vec::new();

        if !(self.horizon_hours.is_finite() && self.horizon_hours >= 0.0) {
            errs.push(format!("horizon_hours must be nonnegative, got {}", self.horizon_hours));
        }

        let mut ids = BTreeSet::new();
        for node in &self.nodes {
            if !ids.insert(node.id.clone()) {
                errs.push(format!("duplicate node id {}", node.id));
            }
            if !id_charset_ok(&node.id) {
                errs.push(format!(
                    "node id {:?} may only contain ASCII alphanumerics, '_', '-', '.'",
                    node.id.as_str()
                ));
            }
            self.check_node(node, &mut errs);
        }
        for node in &self.nodes {
            for peer in node.behavior.granted_overrides.keys() {
                if !ids.contains(peer) {
                    errs.push(format!("node {}: granted override for unknown node {peer}", node.id));
                }
            }
            for peer in node.control_overrides.keys() {
                if !ids.contains(peer) {
                    errs.push(format!("node {}: control override for unknown node {peer}", node.id));
                }
            }
        }

        let mut previous_time = f64::NEG_INFINITY;
        for (index, item) in self.schedule.iter().enumerate() {
            if !item.time.is_finite() || item.time < 0.0 || item.time > self.horizon_hours {
                errs.push(format!(
                    "schedule[{index}]: time {} outside [0, {}]",
                    item.time, self.horizon_hours
                ));
            }
            if item.time < previous_time {
                errs.push(format!("schedule[{index}]: times must be sorted ascending"));
            }
            previous_time = previous_time.max(item.time);
            if !ids.contains(&item.actor) {
                errs.push(format!("schedule[{index}]: unknown actor {}", item.actor));
            }
            let target = item.action.target();
            if !ids.contains(target) {
                errs.push(format!("schedule[{index}]: unknown target {target}"));
            }
            if item.actor == *target {
                errs.push(format!("schedule[{index}]: actor {} targets itself", item.actor));
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations: errs })
        }
    }

    fn check_node(&self, node: &NodeConfig, errs: &mut Vec<String>) {
        let id = &node.id;
        if !(node.wait_hours.is_finite() && node.wait_hours > 0.0) {
            errs.push(format!("node {id}: wait_hours must be positive, got {}", node.wait_hours));
        }
        if node.t_min == 0 {
            errs.push(format!("node {id}: t_min must be at least 1"));
        }
        if !(node.interaction_threshold.is_finite()
            && (0.0..=1.0).contains(&node.interaction_threshold))
        {
            errs.push(format!(
                "node {id}: interaction_threshold must lie in [0,1], got {}",
                node.interaction_threshold
            ));
        }
        if !(node.disclosure_threshold.is_finite()
            && (-1.0..=2.0).contains(&node.disclosure_threshold))
        {
            errs.push(format!(
                "node {id}: disclosure_threshold must lie in [-1,2], got {}",
                node.disclosure_threshold
            ));
        }
        let p = node.behavior.respond_probability;
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            errs.push(format!("node {id}: respond_probability must lie in [0,1], got {p}"));
        }
        node.behavior.response_delay.check(errs, id);
        for (peer, &level) in &node.behavior.granted_overrides {
            if node.behavior.granted.with_level(level).is_err() {
                errs.push(format!(
                    "node {id}: granted level {level} for {peer} outside scale [{}, {}]",
                    node.behavior.granted.r_min(),
                    node.behavior.granted.r_max()
                ));
            }
        }
    }

}
