//! Deterministic discrete-event simulation of a peer community.
//!
//! Nodes issue data requests and opinion requests against a scheduled
//! timeline, respond according to behavior profiles, keep opinion ledgers,
//! and evaluate trust and confidence on demand. Runs are pure functions of
//! the scenario (including its seed): identical scenarios produce identical
//! traces, byte for byte.

mod config;
mod digest;
mod engine;
mod event;
mod rng;

pub use config::{
    Action, BehaviorProfile, DelayDistribution, NodeConfig, RelevanceDistribution, Scenario,
    ScheduleItem, ValidationError,
};
pub use digest::Fnv1a64;
pub use engine::{run_scenario, QueryError, Simulation};
pub use event::{EventKind, SimulationTrace, TraceEvent, TrustMatrixEntry};
