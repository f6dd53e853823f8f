//! Deterministic discrete-time simulator for distributed multi-robot
//! patrolling with a base station.
//!
//! Robots patrol a square grid field, keep a local table of how long each
//! grid has been idle, gossip that table with robots in communication range,
//! and pick their next target reactively. The base station sits at the
//! origin and never moves; how fresh its table is measures how well it is
//! kept informed.

pub mod engine;
pub mod error;
pub mod experiment;
pub mod knowledge;
pub mod metrics;
pub mod network;
pub mod policy;
pub mod world;

pub use engine::{run_trial, Simulation, TrialConfig, TrialResult};
pub use error::{Error, Result};
pub use policy::Algorithm;
