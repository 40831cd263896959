//! Interaction-property scoring.
//!
//! Every answered request is scored on five properties: response time, time
//! gap, familiarity, reciprocity and relevance. The three time-based scores
//! follow Gompertz curves (double-exponential sigmoids), reciprocity
//! normalizes a granted privilege level, and relevance maps a five-level
//! grade to a fixed score. The weighted sum of the five scores decides
//! whether the interaction counts as positive or negative.

use thiserror::Error;

/// Errors from score construction and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ScoreError {
    /// A time quantity was negative, NaN or infinite.
    #[error("time value must be finite and nonnegative, got {0}")]
    InvalidTime(f64),
    /// Curve constants must be finite and strictly positive.
    #[error("gompertz constants must be finite and positive, got b={b}, c={c}")]
    InvalidGompertz { b: f64, c: f64 },
    /// Privilege scale is degenerate (`r_min >= r_max`) or `r` lies outside it.
    #[error("invalid privilege level: r={r} on scale [{r_min}, {r_max}]")]
    InvalidPrivilege { r: i64, r_min: i64, r_max: i64 },
    /// Weight vector components outside [0,1] or sum away from 1.
    #[error("property weights must lie in [0,1] and sum to 1, got sum {sum}")]
    InvalidWeights { sum: f64 },
    /// A unit-interval argument fell outside [0,1].
    #[error("{what} must lie in [0,1], got {value}")]
    OutOfUnitRange { what: &'static str, value: f64 },
}

/// Shape (`b`) and rate (`c`) constants of a Gompertz curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GompertzParams {
    b: f64,
    c: f64,
}

/// Response-time curve constants used when a node does not set its own.
pub const DEFAULT_RESPONSE_CURVE: GompertzParams = GompertzParams { b: 500.0, c: 0.5 };
/// Time-gap curve constants used when a node does not set its own.
pub const DEFAULT_GAP_CURVE: GompertzParams = GompertzParams { b: 10.0, c: 0.25 };
/// Familiarity curve constants used when a node does not set its own.
pub const DEFAULT_FAMILIARITY_CURVE: GompertzParams = GompertzParams { b: 10.0, c: 2.5 };
/// Positive/negative classification threshold used when a node does not set its own.
pub const DEFAULT_INTERACTION_THRESHOLD: f64 = 0.5;

impl GompertzParams {
    /// Validates `b > 0`, `c > 0`, both finite.
    pub fn new(b: f64, c: f64) -> Result<Self, ScoreError> {
        if !(b.is_finite() && c.is_finite() && b > 0.0 && c > 0.0) {
            return Err(ScoreError::InvalidGompertz { b, c });
        }
        Ok(Self { b, c })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Five-level relevance grade, ordered from least to most relevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelevanceGrade {
    NotAtAllRelevant,
    MayNotBeRelevant,
    CantSay,
    ToSomeExtentRelevant,
    FullyRelevant,
}

impl RelevanceGrade {
    /// All grades in ascending order.
    pub const ALL: [RelevanceGrade; 5] = [
        RelevanceGrade::NotAtAllRelevant,
        RelevanceGrade::MayNotBeRelevant,
        RelevanceGrade::CantSay,
        RelevanceGrade::ToSomeExtentRelevant,
        RelevanceGrade::FullyRelevant,
    ];

    /// Fixed grade-to-score mapping.
    pub fn score(self) -> f64 {
        match self {
            RelevanceGrade::NotAtAllRelevant => 0.00,
            RelevanceGrade::MayNotBeRelevant => 0.25,
            RelevanceGrade::CantSay => 0.50,
            RelevanceGrade::ToSomeExtentRelevant => 0.75,
            RelevanceGrade::FullyRelevant => 1.00,
        }
    }
}

/// A privilege level `r` on the responder's scale `[r_min, r_max]`.
///
/// `r_max` is free access, `r_min` is no access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrivilegeLevel {
    r: i64,
    r_min: i64,
    r_max: i64,
}

impl PrivilegeLevel {
    /// Validates `r_min < r_max` and `r_min <= r <= r_max`.
    pub fn new(r: i64, r_min: i64, r_max: i64) -> Result<Self, ScoreError> {
        if r_min >= r_max || r < r_min || r > r_max {
            return Err(ScoreError::InvalidPrivilege { r, r_min, r_max });
        }
        Ok(Self { r, r_min, r_max })
    }

    /// Same scale, different granted level.
    pub fn with_level(&self, r: i64) -> Result<Self, ScoreError> {
        Self::new(r, self.r_min, self.r_max)
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn r_min(&self) -> i64 {
        self.r_min
    }

    pub fn r_max(&self) -> i64 {
        self.r_max
    }
}

/// Per-property weights, indexed in the order: response time, time gap,
/// familiarity, reciprocity, relevance. Components lie in [0,1] and sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyWeights([f64; 5]);

/// Tolerance on the weight-vector sum.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

impl PropertyWeights {
    pub fn new(weights: [f64; 5]) -> Result<Self, ScoreError> {
        let sum: f64 = weights.iter().sum();
        let components_ok = weights
            .iter()
            .all(|w| w.is_finite() && (0.0..=1.0).contains(w));
        if !components_ok || (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(ScoreError::InvalidWeights { sum });
        }
        Ok(Self(weights))
    }

    pub fn as_array(&self) -> &[f64; 5] {
        &self.0
    }
}

impl Default for PropertyWeights {
    /// The weights a node uses unless configured otherwise:
    /// response time 0.2, time gap 0.1, familiarity 0.3, reciprocity 0.3,
    /// relevance 0.1.
    fn default() -> Self {
        Self([0.2, 0.1, 0.3, 0.3, 0.1])
    }
}

/// Everything needed to score one interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionInputs {
    /// Time from request to response, in hours.
    pub response_elapsed: f64,
    /// Time since the previous completed interaction with the peer, in months.
    pub gap_since_previous: f64,
    /// Age of the acquaintance, in years.
    pub acquaintance_age: f64,
    /// Privilege level the responder granted the requester.
    pub privilege: PrivilegeLevel,
    /// Relevance grade the requester assigned to the response.
    pub relevance: RelevanceGrade,
    pub params_response: GompertzParams,
    pub params_gap: GompertzParams,
    pub params_familiarity: GompertzParams,
}

/// Positive/negative status of an interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Positive,
    Negative,
}

impl core::fmt::Display for Classification {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Classification::Positive => "positive",
            Classification::Negative => "negative",
        })
    }
}


/// The five property scores and their weighted aggregate, not yet classified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateScore {
    /// Scores in property order: response time, time gap, familiarity,
    /// reciprocity, relevance.
    pub scores: [f64; 5],
    /// Weighted sum of the five scores.
    pub aggregate: f64,
}

impl AggregateScore {
    /// Finish the evaluation by classifying against `threshold`.
    pub fn classify(self, threshold: f64) -> Result<InteractionScore, ScoreError> {
        let classification = classify_interaction(self.aggregate, threshold)?;
        Ok(InteractionScore {
            scores: self.scores,
            aggregate: self.aggregate,
            classification,
        })
    }
}

/// A fully scored and classified interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionScore {
    /// Scores in property order: response time, time gap, familiarity,
    /// reciprocity, relevance.
    pub scores: [f64; 5],
    /// Weighted sum of the five scores.
    pub aggregate: f64,
    pub classification: Classification,
}

impl InteractionScore {
    /// Score and classify in one step.
    pub fn evaluate(
        inputs: &InteractionInputs,
        weights: &PropertyWeights,
        threshold: f64,
    ) -> Result<Self, ScoreError> {
        aggregate_score(inputs, weights)?.classify(threshold)
    }
}

fn check_time(t: f64) -> Result<f64, ScoreError> {
    if !t.is_finite() || t < 0.0 {
        return Err(ScoreError::InvalidTime(t));
    }
    Ok(t)
}

/// Response-time score: `1 - exp(-b * exp(-c * t))`, `t` in hours.
///
/// Strictly decreasing in `t`; decay is slowest at the start and end of the
/// window.
pub fn response_time_score(params: &GompertzParams, elapsed_hours: f64) -> Result<f64, ScoreError> {
    let t = check_time(elapsed_hours)?;
    Ok(1.0 - libm::exp(-params.b * libm::exp(-params.c * t)))
}

/// Time-gap score: `1 - exp(-b * exp(-c * t))`, `t` in months since the
/// previous completed interaction.
pub fn time_gap_score(params: &GompertzParams, gap_months: f64) -> Result<f64, ScoreError> {
    let t = check_time(gap_months)?;
    Ok(1.0 - libm::exp(-params.b * libm::exp(-params.c * t)))
}

/// Familiarity score: `exp(-b * exp(-c * t))`, `t` in years of acquaintance.
///
/// Strictly increasing in `t`; growth is slowest at the start and end.
pub fn familiarity_score(params: &GompertzParams, age_years: f64) -> Result<f64, ScoreError> {
    let t = check_time(age_years)?;
    Ok(libm::exp(-params.b * libm::exp(-params.c * t)))
}

/// Reciprocity score: `(r - r_min) / (r_max - r_min)`.
///
/// Infallible because [`PrivilegeLevel`] construction already rejects
/// degenerate scales.
pub fn reciprocity_score(privilege: &PrivilegeLevel) -> f64 {
    (privilege.r - privilege.r_min) as f64 / (privilege.r_max - privilege.r_min) as f64
}

/// Relevance score from the fixed grade table.
pub fn relevance_score(grade: RelevanceGrade) -> f64 {
    grade.score()
}

/// Compute the five property scores and their weighted sum.
pub fn aggregate_score(
    inputs: &InteractionInputs,
    weights: &PropertyWeights,
) -> Result<AggregateScore, ScoreError> {
    let scores = [
        response_time_score(&inputs.params_response, inputs.response_elapsed)?,
        time_gap_score(&inputs.params_gap, inputs.gap_since_previous)?,
        familiarity_score(&inputs.params_familiarity, inputs.acquaintance_age)?,
        reciprocity_score(&inputs.privilege),
        relevance_score(inputs.relevance),
    ];
    let aggregate = scores
        .iter()
        .zip(weights.as_array())
        .map(|(s, w)| s * w)
        .sum();
    Ok(AggregateScore { scores, aggregate })
}

/// Positive iff the aggregate strictly exceeds the threshold; a tie is
/// Negative.
pub fn classify_interaction(aggregate: f64, threshold: f64) -> Result<Classification, ScoreError> {
    for (what, value) in [("aggregate score", aggregate), ("threshold", threshold)] {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(ScoreError::OutOfUnitRange { what, value });
        }
    }
    Ok(if aggregate > threshold {
        Classification::Positive
    } else {
        Classification::Negative
    })
}
