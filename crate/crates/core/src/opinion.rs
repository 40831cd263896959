//! Per-peer opinion ledgers.
//!
//! Each node keeps one table with a row per peer: total requests made,
//! positive and negative outcomes, and the timestamps needed to score the
//! next interaction. Personal opinion is the ratio of effective interactions
//! (positive minus negative) to total requests, so unanswered requests drag
//! the opinion toward zero through the denominator.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

use thiserror::Error;

use crate::score::Classification;

/// Errors from ledger construction and updates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LedgerError {
    /// Node identifiers must be non-empty.
    #[error("node id must be non-empty")]
    EmptyNodeId,
    /// A node may not record requests against itself.
    #[error("node {0} attempted to record a request to itself")]
    SelfRequest(NodeId),
    /// An outcome was recorded with no outstanding request slot.
    #[error("no outstanding request for peer {0}; record_request must precede record_outcome")]
    NoOutstandingRequest(NodeId),
    /// Counter triple violates `positive + negative <= total`.
    #[error("inconsistent counters: positive={positive} + negative={negative} > total={total}")]
    InconsistentCounts { positive: u32, negative: u32, total: u32 },
}

/// Identifier of a node, unique within a community.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self, LedgerError> {
        let id = id.into();
        if id.is_empty() {
            return Err(LedgerError::EmptyNodeId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One row of an opinion table.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OpinionEntry {
    positive: u32,
    negative: u32,
    total: u32,
    last_interaction_time: Option<f64>,
    first_contact_time: Option<f64>,
}

impl OpinionEntry {
    /// Build an entry from bare counters, e.g. when reading a table snapshot.
    pub fn from_counts(positive: u32, negative: u32, total: u32) -> Result<Self, LedgerError> {
        if positive.saturating_add(negative) > total {
            return Err(LedgerError::InconsistentCounts { positive, negative, total });
        }
        Ok(Self {
            positive,
            negative,
            total,
            last_interaction_time: None,
            first_contact_time: None,
        })
    }

    /// Positive outcomes recorded so far.
    pub fn positive(&self) -> u32 {
        self.positive
    }

    /// Negative outcomes recorded so far.
    pub fn negative(&self) -> u32 {
        self.negative
    }

    /// Total requests made, including those never answered.
    pub fn total(&self) -> u32 {
        self.total
    }

    /// Time of the last completed interaction, in simulation hours.
    pub fn last_interaction_time(&self) -> Option<f64> {
        self.last_interaction_time
    }

    /// Time of the first request ever sent to this peer, in simulation hours.
    pub fn first_contact_time(&self) -> Option<f64> {
        self.first_contact_time
    }

    /// Personal opinion: `(positive - negative) / total`, or 0 when there is
    /// nothing to judge by.
    pub fn personal_opinion(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        (self.positive as i64 - self.negative as i64) as f64 / self.total as f64
    }

    /// Node weight: the personal opinion when positives outnumber negatives,
    /// zero otherwise.
    pub fn node_weight(&self) -> f64 {
        if self.positive > self.negative {
            self.personal_opinion()
        } else {
            0.0
        }
    }

    fn outstanding(&self) -> bool {
        self.positive + self.negative < self.total
    }
}

/// A node's opinion table: one [`OpinionEntry`] per peer it has contacted.
///
/// The owner has an implicit self-entry with opinion 1 that is never stored;
/// all stored entries concern other nodes. A table has a single writer (its
/// owner); snapshots are plain values and safe to share.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionTable {
    owner: NodeId,
    entries: BTreeMap<NodeId, OpinionEntry>,
}

impl OpinionTable {
    pub fn new(owner: NodeId) -> Self {
        Self {
            owner,
            entries: BTreeMap::new(),
        }
    }

    pub fn owner(&self) -> &NodeId {
        &self.owner
    }

    /// The stored entry for `peer`, if any request was ever made.
    pub fn entry(&self, peer: &NodeId) -> Option<&OpinionEntry> {
        self.entries.get(peer)
    }

    /// Entries in ascending peer-id order. The owner never appears.
    pub fn entries(&self) -> impl Iterator<Item = (&NodeId, &OpinionEntry)> {
        self.entries.iter()
    }

    /// Personal opinion on `node`; 1 for the owner itself, 0 for strangers.
    pub fn personal_opinion_of(&self, node: &NodeId) -> f64 {
        if *node == self.owner {
            return 1.0;
        }
        self.entries
            .get(node)
            .map(OpinionEntry::personal_opinion)
            .unwrap_or(0.0)
    }

    /// Node weight for `node`; 1 for the owner itself, 0 for strangers.
    pub fn node_weight_of(&self, node: &NodeId) -> f64 {
        if *node == self.owner {
            return 1.0;
        }
        self.entries
            .get(node)
            .map(OpinionEntry::node_weight)
            .unwrap_or(0.0)
    }

    /// Record a request sent to `peer` at time `now` (hours).
    ///
    /// Creates the entry on first contact and bumps the total; a request that
    /// is never answered keeps weighing on the opinion denominator.
    pub fn record_request(&mut self, peer: &NodeId, now: f64) -> Result<(), LedgerError> {
        if *peer == self.owner {
            return Err(LedgerError::SelfRequest(peer.to_owned()));
        }
        let entry = self.entries.entry(peer.to_owned()).or_default();
        entry.total += 1;
        if entry.first_contact_time.is_none() {
            entry.first_contact_time = Some(now);
        }
        Ok(())
    }

    /// Record the classified outcome of a previously sent request.
    pub fn record_outcome(
        &mut self,
        peer: &NodeId,
        classification: Classification,
        now: f64,
    ) -> Result<(), LedgerError> {
        let entry = self
            .entries
            .get_mut(peer)
            .filter(|e| e.outstanding())
            .ok_or_else(|| LedgerError::NoOutstandingRequest(peer.to_owned()))?;
        match classification {
            Classification::Positive => entry.positive += 1,
            Classification::Negative => entry.negative += 1,
        }
        entry.last_interaction_time = Some(now);
        Ok(())
    }
}
