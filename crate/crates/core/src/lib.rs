//! Antenna-tuning testbed: a simulated macro cellular network with
//! controllable tilt and downlink power, graph Q-network training with an
//! additive per-agent value decomposition, comparison baselines, and the
//! experiment harness that drives them.

pub mod agent;
pub mod baselines;
pub mod env;
pub mod error;
pub mod harness;
pub mod nn;
pub mod radio;

pub use error::{Error, Result};
