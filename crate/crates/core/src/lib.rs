//! Latency-aware spectrum steering: trace segmentation, latency decomposition,
//! distributional profiling, mechanism selection and a closed-loop simulator.
//!
//! `no_std` with `alloc`; file formats and the CLI live in the `polaris` crate.

#![no_std]

extern crate alloc;

pub mod decomposition;
pub mod domain;
pub mod evaluation;
pub mod policy;
pub mod profiling;
pub mod simulator;
pub mod trace;

pub use decomposition::{decompose, stage_share, LatencyDecomposition, Stage};
pub use domain::{Layer, MechanismKind, MilestoneKind, Rat, Family, StageLabel};
pub use policy::{select, BaselineKind, PolicyDecision, PolicyError, PolicyParams, Scenario};
pub use profiling::{DisruptionProfile, ProfileStore, StoreConfig};
pub use trace::{segment_executions, IngestMode, IngestReport, SteeringExecution, TraceEvent};
