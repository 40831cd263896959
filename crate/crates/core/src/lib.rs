//! Trust-and-confidence engine for participant-driven privacy control.
//!
//! Peers score each interaction on five properties (response time, time gap,
//! familiarity, reciprocity, relevance), keep per-peer opinion ledgers, blend
//! personal and community opinion into a trust value, add institutional
//! control to obtain confidence, and gate disclosure on a threshold.
//! [`sim`] drives the whole pipeline inside a deterministic discrete-event
//! simulation of a peer community.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the CLI
//! live in the companion `peertrust-cli` crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod confidence;
pub mod opinion;
pub mod score;
pub mod sim;
pub mod trust;

pub use confidence::{ConfidenceResult, ControlModel, ControlParameter};
pub use opinion::{NodeId, OpinionEntry, OpinionTable};
pub use score::{
    Classification, GompertzParams, InteractionInputs, InteractionScore, PrivilegeLevel,
    PropertyWeights, RelevanceGrade,
};
pub use sim::{Scenario, Simulation, SimulationTrace};
pub use trust::{OpinionReport, TrustAssessment, TrustBasis};

/// Hours per month used when converting simulator time into Eq.-style units.
pub const HOURS_PER_MONTH: f64 = 720.0;
/// Hours per year used when converting simulator time into Eq.-style units.
pub const HOURS_PER_YEAR: f64 = 8760.0;
