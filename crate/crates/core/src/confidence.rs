//! Control, confidence and the disclosure decision.
//!
//! Control captures the external structures (behaviour, legal system, social
//! norms, ...) that push a peer toward trustworthy behavior. Confidence is
//! trust plus control, and data is shared only when confidence strictly
//! exceeds the owner's disclosure threshold.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

/// Errors from control-model construction and confidence evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    /// Parameter confidence and weight must lie in [0,1].
    #[error("control parameter {name}: {what} must lie in [0,1], got {value}")]
    ParameterOutOfRange {
        name: String,
        what: &'static str,
        value: f64,
    },
    /// Control weights must sum to 1.
    #[error("control weights must sum to 1, got {sum}")]
    WeightSum { sum: f64 },
    /// Trust input to the confidence sum must lie in [-1,1].
    #[error("trust must lie in [-1,1], got {0}")]
    TrustOutOfRange(f64),
    /// Control input to the confidence sum must lie in [0,1].
    #[error("control must lie in [0,1], got {0}")]
    ControlOutOfRange(f64),
    /// Disclosure thresholds live on the confidence scale [-1,2].
    #[error("disclosure threshold must lie in [-1,2], got {0}")]
    ThresholdOutOfRange(f64),
}

/// One control parameter: a label, the node's confidence in it, and its
/// relative weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlParameter {
    name: String,
    confidence: f64,
    weight: f64,
}

impl ControlParameter {
    pub fn new(
        name: impl Into<String>,
        confidence: f64,
        weight: f64,
    ) -> Result<Self, ControlError> {
        let name = name.into();
        for (what, value) in [("confidence", confidence), ("weight", weight)] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(ControlError::ParameterOutOfRange { name, what, value });
            }
        }
        Ok(Self {
            name,
            confidence,
            weight,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// Tolerance on the control weight sum.
pub const CONTROL_WEIGHT_TOLERANCE: f64 = 1e-9;

/// A weighted set of control parameters whose weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlModel {
    parameters: Vec<ControlParameter>,
}

impl ControlModel {
    pub fn new(parameters: Vec<ControlParameter>) -> Result<Self, ControlError> {
        let sum: f64 = parameters.iter().map(|p| p.weight).sum();
        if (sum - 1.0).abs() > CONTROL_WEIGHT_TOLERANCE {
            return Err(ControlError::WeightSum { sum });
        }
        Ok(Self { parameters })
    }

    pub fn parameters(&self) -> &[ControlParameter] {
        &self.parameters
    }
}

impl Default for ControlModel {
    /// The stock model: behaviour (1.0, 0.2), legal system (0.8, 0.5),
    /// social (0.5, 0.3).
    fn default() -> Self {
        let parameters = alloc::vec![
            ControlParameter::new("behaviour", 1.0, 0.2).unwrap(),
            ControlParameter::new("legal system", 0.8, 0.5).unwrap(),
            ControlParameter::new("social", 0.5, 0.3).unwrap(),
        ];
        Self { parameters }
    }
}

/// Weighted sum of the parameter confidences, in [0,1].
pub fn control_value(model: &ControlModel) -> f64 {
    model
        .parameters
        .iter()
        .map(|p| p.weight * p.confidence)
        .sum()
}

/// Confidence is trust plus control, on the [-1,2] scale.
pub fn confidence(trust: f64, control: f64) -> Result<f64, ControlError> {
    if !trust.is_finite() || !(-1.0..=1.0).contains(&trust) {
        return Err(ControlError::TrustOutOfRange(trust));
    }
    if !control.is_finite() || !(0.0..=1.0).contains(&control) {
        return Err(ControlError::ControlOutOfRange(control));
    }
    Ok(trust + control)
}

/// Share iff confidence strictly exceeds the threshold.
pub fn decide_disclosure(confidence: f64, threshold: f64) -> bool {
    confidence > threshold
}

/// A complete disclosure decision for one (trustor, trustee) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceResult {
    pub trust: f64,
    pub control: f64,
    /// `trust + control`.
    pub confidence: f64,
    pub share: bool,
    pub threshold: f64,
}

impl ConfidenceResult {
    /// Evaluate the confidence sum and the disclosure decision.
    pub fn evaluate(trust: f64, control: f64, threshold: f64) -> Result<Self, ControlError> {
        if !threshold.is_finite() || !(-1.0..=2.0).contains(&threshold) {
            return Err(ControlError::ThresholdOutOfRange(threshold));
        }
        let confidence = confidence(trust, control)?;
        Ok(Self {
            trust,
            control,
            confidence,
            share: decide_disclosure(confidence, threshold),
            threshold,
        })
    }
}
