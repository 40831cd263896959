//! Community opinion aggregation and trust assessment.
//!
//! When a node lacks enough direct interactions with a peer it asks the rest
//! of the community for their opinions, weights each reporter by its own
//! credibility, and merges the result with its personal opinion. Equal and
//! opposite opinions cancel to zero and are flagged as a conflict, which is
//! distinct from the zero of having no history at all.

use alloc::vec::Vec;

use thiserror::Error;

use crate::opinion::{NodeId, OpinionEntry};

/// Errors from opinion aggregation and trust assessment.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrustError {
    /// Opinion values live in [-1,1], weights in [0,1].
    #[error("{what} must lie in [{lo}, 1], got {value}")]
    OutOfRange {
        what: &'static str,
        lo: f64,
        value: f64,
    },
    /// A reporter may not report on itself.
    #[error("reporter {0} cannot report an opinion about itself")]
    ReporterIsSubject(NodeId),
    /// All reports in one aggregation must concern the same subject.
    #[error("reports mix subjects {0} and {1}")]
    MixedSubjects(NodeId, NodeId),
    /// The minimum-interaction gate must be at least 1.
    #[error("t_min must be a positive integer")]
    ZeroTmin,
}

fn check_range(what: &'static str, lo: f64, value: f64) -> Result<f64, TrustError> {
    if !value.is_finite() || value < lo || value > 1.0 {
        return Err(TrustError::OutOfRange { what, lo, value });
    }
    Ok(value)
}

/// One node's opinion about a subject, as collected by the trustor.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionReport {
    reporter: NodeId,
    subject: NodeId,
    opinion: f64,
    reporter_weight: f64,
}

impl OpinionReport {
    /// Validates opinion in [-1,1], weight in [0,1], reporter != subject.
    pub fn new(
        reporter: NodeId,
        subject: NodeId,
        opinion: f64,
        reporter_weight: f64,
    ) -> Result<Self, TrustError> {
        check_range("report opinion", -1.0, opinion)?;
        check_range("reporter weight", 0.0, reporter_weight)?;
        if reporter == subject {
            return Err(TrustError::ReporterIsSubject(reporter));
        }
        Ok(Self {
            reporter,
            subject,
            opinion,
            reporter_weight,
        })
    }

    pub fn reporter(&self) -> &NodeId {
        &self.reporter
    }

    pub fn subject(&self) -> &NodeId {
        &self.subject
    }

    pub fn opinion(&self) -> f64 {
        self.opinion
    }

    /// The weight the trustor assigns this reporter.
    pub fn reporter_weight(&self) -> f64 {
        self.reporter_weight
    }
}

/// Which branch produced the trust value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrustBasis {
    /// Enough direct interactions; community opinion was not consulted.
    PersonalOnly,
    /// Personal opinion combined with community opinion.
    Combined,
}

/// Outcome of a trust evaluation for one (trustor, trustee) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustAssessment {
    /// The trustor's own opinion of the trustee.
    pub personal: f64,
    /// Aggregated community opinion; `None` when not consulted.
    pub community: Option<f64>,
    /// Resulting trust value in [-1,1].
    pub trust: f64,
    pub basis: TrustBasis,
    /// True when personal and community opinion were equal and opposite.
    pub conflict: bool,
}

/// Weighted average of the reporters' opinions: `sum(w * op) / n`.
///
/// `n` counts every report, including zero-weight ones. An empty report set
/// yields 0 (no community opinion).
pub fn community_opinion(reports: &[OpinionReport]) -> Result<f64, TrustError> {
    let Some(first) = reports.first() else {
        return Ok(0.0);
    };
    for report in &reports[1..] {
        if report.subject != first.subject {
            return Err(TrustError::MixedSubjects(
                first.subject.clone(),
                report.subject.clone(),
            ));
        }
    }
    let sum: f64 = reports
        .iter()
        .map(|r| r.reporter_weight * r.opinion)
        .sum();
    Ok(sum / reports.len() as f64)
}

/// Merge personal and community opinion into a trust value.
///
/// A zero on either side yields the other side. Otherwise the value of
/// larger magnitude wins; equal magnitudes with the same sign keep that
/// value, and equal magnitudes with opposite signs cancel to zero with the
/// conflict flag set.
pub fn combine_otimes(personal: f64, community: f64) -> Result<(f64, bool), TrustError> {
    check_range("personal opinion", -1.0, personal)?;
    check_range("community opinion", -1.0, community)?;
    let merged = if personal == 0.0 {
        (community, false)
    } else if community == 0.0 {
        (personal, false)
    } else if personal.abs() > community.abs() {
        (personal, false)
    } else if personal.abs() < community.abs() {
        (community, false)
    } else if personal == community {
        (personal, false)
    } else {
        // Equal magnitude, opposite sign: mischievous-behavior signal.
        (0.0, true)
    };
    Ok(merged)
}

/// Trust assessment with the minimum-interaction gate.
///
/// With at least `t_min` direct interactions the personal opinion stands on
/// its own and `reports` are ignored; below the gate the community opinion is
/// aggregated and merged in.
pub fn assess_trust(
    entry: &OpinionEntry,
    reports: &[OpinionReport],
    t_min: u32,
) -> Result<TrustAssessment, TrustError> {
    if t_min == 0 {
        return Err(TrustError::ZeroTmin);
    }
    let personal = entry.personal_opinion();
    if entry.total() >= t_min {
        return Ok(TrustAssessment {
            personal,
            community: None,
            trust: personal,
            basis: TrustBasis::PersonalOnly,
            conflict: false,
        });
    }
    let community = community_opinion(reports)?;
    let (trust, conflict) = combine_otimes(personal, community)?;
    Ok(TrustAssessment {
        personal,
        community: Some(community),
        trust,
        basis: TrustBasis::Combined,
        conflict,
    })
}

/// Drop reports authored by the trustor or the subject before aggregation.
///
/// The subject's self-opinion is identically 1 and would bias the average;
/// the trustor's view is already the personal side of the combination.
pub fn admissible_reports(
    reports: impl IntoIterator<Item = OpinionReport>,
    trustor: &NodeId,
    subject: &NodeId,
) -> Vec<OpinionReport> {
    reports
        .into_iter()
        .filter(|r| r.reporter() != trustor && r.reporter() != subject)
        .collect()
}
