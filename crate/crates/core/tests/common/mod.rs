//! Brute-force oracles shared by the integration tests.
//!
//! Everything here recounts raw event logs with plain arithmetic, staying
//! independent of the ledger and simulator code paths it checks.

use std::collections::BTreeMap;

use peertrust_core::score::{
    aggregate_score, Classification, InteractionInputs, InteractionScore, RelevanceGrade,
};
use peertrust_core::sim::{EventKind, NodeConfig, Scenario, TraceEvent};
use peertrust_core::{NodeId, HOURS_PER_MONTH, HOURS_PER_YEAR};

/// A raw ledger event, as fed to `OpinionTable` by whatever produced the log.
#[derive(Debug, Clone)]
pub enum LedgerOp {
    Request { peer: String, at: f64 },
    Outcome { peer: String, class: Classification, at: f64 },
}

/// Plain recount of one peer's history.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FoldEntry {
    pub positive: u32,
    pub negative: u32,
    pub total: u32,
    pub last: Option<f64>,
    pub first: Option<f64>,
}

impl FoldEntry {
    /// Eq.-style opinion, written out independently of the ledger code.
    pub fn opinion(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.positive as i64 - self.negative as i64) as f64 / self.total as f64
        }
    }

    pub fn weight(&self) -> f64 {
        if self.positive > self.negative {
            self.opinion()
        } else {
            0.0
        }
    }

    fn apply_request(&mut self, at: f64) {
        self.total += 1;
        if self.first.is_none() {
            self.first = Some(at);
        }
    }

    fn apply_outcome(&mut self, class: Classification, at: f64) {
        match class {
            Classification::Positive => self.positive += 1,
            Classification::Negative => self.negative += 1,
        }
        self.last = Some(at);
    }
}

/// Recount a raw op log per peer.
pub fn recount_ops(ops: &[LedgerOp]) -> BTreeMap<String, FoldEntry> {
    let mut entries: BTreeMap<String, FoldEntry> = BTreeMap::new();
    for op in ops {
        match op {
            LedgerOp::Request { peer, at } => {
                entries.entry(peer.clone()).or_default().apply_request(*at)
            }
            LedgerOp::Outcome { peer, class, at } => entries
                .entry(peer.clone())
                .or_default()
                .apply_outcome(*class, *at),
        }
    }
    entries
}

/// Recount every (owner, peer) pair from a simulation trace.
///
/// With `score_opinion_responses` set, opinion requests and scored opinion
/// responses enter the count exactly like data requests and responses.
pub fn recount_trace(
    events: &[TraceEvent],
    score_opinion_responses: bool,
) -> BTreeMap<(String, String), FoldEntry> {
    let mut entries: BTreeMap<(String, String), FoldEntry> = BTreeMap::new();
    let pair = |a: &NodeId, b: &NodeId| (a.as_str().to_owned(), b.as_str().to_owned());
    for event in events {
        match &event.kind {
            EventKind::RequestSent { actor, peer, .. } => entries
                .entry(pair(actor, peer))
                .or_default()
                .apply_request(event.time),
            EventKind::ResponseReceived { actor, peer, score, .. } => entries
                .entry(pair(actor, peer))
                .or_default()
                .apply_outcome(score.classification, event.time),
            EventKind::OpinionRequested { actor, peer, .. } if score_opinion_responses => entries
                .entry(pair(actor, peer))
                .or_default()
                .apply_request(event.time),
            EventKind::OpinionReported { actor, peer, score: Some(score), .. } => {
                // Reporter answered `peer`'s opinion request, so the ledger
                // movement is on (peer, reporter).
                entries
                    .entry(pair(peer, actor))
                    .or_default()
                    .apply_outcome(score.classification, event.time)
            }
            _ => {}
        }
    }
    entries
}

fn grade_from_score(value: f64) -> RelevanceGrade {
    RelevanceGrade::ALL
        .into_iter()
        .find(|g| g.score() == value)
        .expect("relevance score must come from the fixed table")
}

/// Recompute the score of every scored response in the trace from first
/// principles: event times, hand unit conversions, and the scenario config.
///
/// Returns (event seq, recomputed score) pairs; they must match the embedded
/// scores bit for bit.
pub fn recompute_scores(
    scenario: &Scenario,
    events: &[TraceEvent],
) -> Vec<(u64, InteractionScore, InteractionScore)> {
    let configs: BTreeMap<&NodeId, &NodeConfig> =
        scenario.nodes.iter().map(|n| (&n.id, n)).collect();
    let mut request_sent: BTreeMap<u64, f64> = BTreeMap::new();
    let mut query_started: BTreeMap<u64, f64> = BTreeMap::new();
    let mut fold: BTreeMap<(String, String), FoldEntry> = BTreeMap::new();
    let pair = |a: &NodeId, b: &NodeId| (a.as_str().to_owned(), b.as_str().to_owned());
    let mut checked = Vec::new();

    for event in events {
        match &event.kind {
            EventKind::RequestSent { actor, peer, request } => {
                request_sent.insert(*request, event.time);
                fold.entry(pair(actor, peer)).or_default().apply_request(event.time);
            }
            EventKind::OpinionRequested { actor, peer, query, .. } => {
                query_started.insert(*query, event.time);
                if scenario.score_opinion_responses {
                    fold.entry(pair(actor, peer)).or_default().apply_request(event.time);
                }
            }
            EventKind::ResponseReceived { actor, peer, request, score } => {
                let sent_at = request_sent[request];
                let entry = fold.entry(pair(actor, peer)).or_default();
                let expected = expected_score(
                    configs[actor],
                    configs[peer],
                    actor,
                    event.time,
                    sent_at,
                    *entry,
                    grade_from_score(score.scores[4]),
                );
                entry.apply_outcome(expected.classification, event.time);
                checked.push((event.seq, expected, *score));
            }
            EventKind::OpinionReported { actor, peer, query, score: Some(score), .. } => {
                let sent_at = query_started[query];
                let entry = fold.entry(pair(peer, actor)).or_default();
                let expected = expected_score(
                    configs[peer],
                    configs[actor],
                    peer,
                    event.time,
                    sent_at,
                    *entry,
                    RelevanceGrade::FullyRelevant,
                );
                entry.apply_outcome(expected.classification, event.time);
                checked.push((event.seq, expected, *score));
            }
            _ => {}
        }
    }
    checked
}

fn expected_score(
    requester: &NodeConfig,
    responder: &NodeConfig,
    requester_id: &NodeId,
    arrival: f64,
    sent_at: f64,
    before: FoldEntry,
    grade: RelevanceGrade,
) -> InteractionScore {
    let inputs = InteractionInputs {
        response_elapsed: arrival - sent_at,
        gap_since_previous: before
            .last
            .map(|prev| (arrival - prev) / HOURS_PER_MONTH)
            .unwrap_or(0.0),
        acquaintance_age: (arrival - before.first.expect("request precedes response"))
            / HOURS_PER_YEAR,
        privilege: responder.behavior.granted_for(requester_id),
        relevance: grade,
        params_response: requester.response_curve,
        params_gap: requester.gap_curve,
        params_familiarity: requester.familiarity_curve,
    };
    aggregate_score(&inputs, &requester.weights)
        .expect("trace times are nonnegative")
        .classify(requester.interaction_threshold)
        .expect("thresholds validated")
}
