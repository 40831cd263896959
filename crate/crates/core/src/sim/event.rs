//! Trace events, the run trace, and the canonical digest.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use super::digest::Fnv1a64;
use crate::confidence::ConfidenceResult;
use crate::opinion::{NodeId, OpinionTable};
use crate::score::{Classification, InteractionScore};
use crate::trust::{TrustAssessment, TrustBasis};

/// What happened at one point of the run.
#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    /// `actor` asked `peer` for data.
    RequestSent {
        actor: NodeId,
        peer: NodeId,
        request: u64,
    },
    /// `peer`'s answer reached `actor` inside the wait window and was scored.
    ResponseReceived {
        actor: NodeId,
        peer: NodeId,
        request: u64,
        score: InteractionScore,
    },
    /// The wait window on a data request closed with no usable answer.
    Timeout {
        actor: NodeId,
        peer: NodeId,
        request: u64,
    },
    /// `actor` asked `peer` for its opinion about `subject`.
    OpinionRequested {
        actor: NodeId,
        peer: NodeId,
        subject: NodeId,
        query: u64,
    },
    /// `actor` reported its opinion about `subject` back to `peer`.
    OpinionReported {
        actor: NodeId,
        peer: NodeId,
        subject: NodeId,
        query: u64,
        opinion: f64,
        /// Present when opinion responses are scored as interactions.
        score: Option<InteractionScore>,
    },
    /// `actor` finished a trust evaluation of `peer`.
    TrustAssessed {
        actor: NodeId,
        peer: NodeId,
        query: u64,
        assessment: TrustAssessment,
    },
    /// `actor` decided whether to share data with `peer`.
    DisclosureDecided {
        actor: NodeId,
        peer: NodeId,
        query: u64,
        decision: ConfidenceResult,
    },
}

impl EventKind {
    /// Stable lowercase name, used in trace files and the digest.
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::RequestSent { .. } => "request_sent",
            EventKind::ResponseReceived { .. } => "response_received",
            EventKind::Timeout { .. } => "timeout",
            EventKind::OpinionRequested { .. } => "opinion_requested",
            EventKind::OpinionReported { .. } => "opinion_reported",
            EventKind::TrustAssessed { .. } => "trust_assessed",
            EventKind::DisclosureDecided { .. } => "disclosure_decided",
        }
    }

    /// The node at which the event is observed.
    pub fn actor(&self) -> &NodeId {
        match self {
            EventKind::RequestSent { actor, .. }
            | EventKind::ResponseReceived { actor, .. }
            | EventKind::Timeout { actor, .. }
            | EventKind::OpinionRequested { actor, .. }
            | EventKind::OpinionReported { actor, .. }
            | EventKind::TrustAssessed { actor, .. }
            | EventKind::DisclosureDecided { actor, .. } => actor,
        }
    }

    /// The counterparty.
    pub fn peer(&self) -> &NodeId {
        match self {
            EventKind::RequestSent { peer, .. }
            | EventKind::ResponseReceived { peer, .. }
            | EventKind::Timeout { peer, .. }
            | EventKind::OpinionRequested { peer, .. }
            | EventKind::OpinionReported { peer, .. }
            | EventKind::TrustAssessed { peer, .. }
            | EventKind::DisclosureDecided { peer, .. } => peer,
        }
    }
}

/// One timestamped trace record.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    /// Simulation hours.
    pub time: f64,
    /// Emission order; ties in time keep ascending `seq`.
    pub seq: u64,
    pub kind: EventKind,
}

fn classification_word(c: Classification) -> &'static str {
    match c {
        Classification::Positive => "positive",
        Classification::Negative => "negative",
    }
}

fn basis_word(b: TrustBasis) -> &'static str {
    match b {
        TrustBasis::PersonalOnly => "personal_only",
        TrustBasis::Combined => "combined",
    }
}

struct CanonicalScore<'a>(&'a InteractionScore);

impl fmt::Display for CanonicalScore<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0;
        write!(
            f,
            "{},{},{},{},{};{};{}",
            s.scores[0],
            s.scores[1],
            s.scores[2],
            s.scores[3],
            s.scores[4],
            s.aggregate,
            classification_word(s.classification)
        )
    }
}

struct CanonicalAssessment<'a>(&'a TrustAssessment);

impl fmt::Display for CanonicalAssessment<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0;
        write!(f, "{};", a.personal)?;
        match a.community {
            Some(c) => write!(f, "{c}")?,
            None => f.write_str("-")?,
        }
        write!(f, ";{};{};{}", a.trust, basis_word(a.basis), a.conflict)
    }
}

struct CanonicalDecision<'a>(&'a ConfidenceResult);

impl fmt::Display for CanonicalDecision<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.0;
        write!(
            f,
            "{};{};{};{};{}",
            d.trust, d.control, d.confidence, d.share, d.threshold
        )
    }
}

/// Canonical one-line form; this is exactly what the digest consumes.
impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}|{}", self.seq, self.time, self.kind.name())?;
        match &self.kind {
            EventKind::RequestSent { actor, peer, request }
            | EventKind::Timeout { actor, peer, request } => {
                write!(f, "|{actor}|{peer}|{request}")
            }
            EventKind::ResponseReceived { actor, peer, request, score } => {
                write!(f, "|{actor}|{peer}|{request}|{}", CanonicalScore(score))
            }
            EventKind::OpinionRequested { actor, peer, subject, query } => {
                write!(f, "|{actor}|{peer}|{subject}|{query}")
            }
            EventKind::OpinionReported { actor, peer, subject, query, opinion, score } => {
                write!(f, "|{actor}|{peer}|{subject}|{query}|{opinion}")?;
                if let Some(s) = score {
                    write!(f, "|{}", CanonicalScore(s))?;
                }
                Ok(())
            }
            EventKind::TrustAssessed { actor, peer, query, assessment } => {
                write!(f, "|{actor}|{peer}|{query}|{}", CanonicalAssessment(assessment))
            }
            EventKind::DisclosureDecided { actor, peer, query, decision } => {
                write!(f, "|{actor}|{peer}|{query}|{}", CanonicalDecision(decision))
            }
        }
    }
}

/// Trust-matrix cell: what `trustor` would conclude about `trustee` right
/// now, from its ledger and an idealized instantaneous opinion round.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustMatrixEntry {
    pub trustor: NodeId,
    pub trustee: NodeId,
    pub assessment: TrustAssessment,
    pub decision: ConfidenceResult,
}

/// Everything a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    /// Sorted by time, ties broken by `seq`.
    pub events: Vec<TraceEvent>,
    pub final_tables: BTreeMap<NodeId, OpinionTable>,
    /// All ordered pairs at the horizon, sorted by (trustor, trustee).
    pub trust_matrix: Vec<TrustMatrixEntry>,
}

impl SimulationTrace {
    /// Order-sensitive digest of the canonical event serialization.
    pub fn digest(&self) -> u64 {
        trace_digest(self)
    }
}

/// FNV-1a 64 over the canonical line serialization of the events.
///
/// Stable across runs and platforms; the digest of an empty trace is the
/// FNV offset basis.
pub fn trace_digest(trace: &SimulationTrace) -> u64 {
    let mut hasher = Fnv1a64::new();
    for event in &trace.events {
        write!(hasher, "{event}\n").expect("hash sink never fails");
    }
    hasher.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    #[test]
    fn empty_trace_digest_is_the_offset_basis() {
        let trace = SimulationTrace {
            events: Vec::new(),
            final_tables: BTreeMap::new(),
            trust_matrix: Vec::new(),
        };
        assert_eq!(trace.digest(), 0xcbf2_9ce4_8422_2325);
    }

    #[test]
    fn canonical_line_is_stable() {
        let event = TraceEvent {
            time: 48.0,
            seq: 3,
            kind: EventKind::Timeout {
                actor: id("alice"),
                peer: id("mute"),
                request: 2,
            },
        };
        assert_eq!(alloc::format!("{event}"), "3|48|timeout|alice|mute|2");
    }

    #[test]
    fn digest_is_order_sensitive() {
        let a = TraceEvent {
            time: 1.0,
            seq: 0,
            kind: EventKind::RequestSent { actor: id("a"), peer: id("b"), request: 0 },
        };
        let b = TraceEvent {
            time: 1.0,
            seq: 1,
            kind: EventKind::RequestSent { actor: id("b"), peer: id("a"), request: 1 },
        };
        let make = |events: Vec<TraceEvent>| SimulationTrace {
            events,
            final_tables: BTreeMap::new(),
            trust_matrix: Vec::new(),
        };
        let forward = make(alloc::vec![a.clone(), b.clone()]);
        let backward = make(alloc::vec![b, a]);
        assert_ne!(forward.digest(), backward.digest());
    }
}
