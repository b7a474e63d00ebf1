//! Simulation and planning for Kirchhoff-Law-Johnson-Noise (KLJN) key
//! exchange networks.
//!
//! * [`noise`]: Johnson-noise sample streams and estimators.
//! * [`link`]: one KLJN link at the waveform level, plus the BEP timing model.
//! * [`adversary`]: passive and active eavesdroppers and intrusion detection.
//! * [`network`]: stations, links and the `.net` description format.
//! * [`planner`]: hardware counts and key-distribution schedules.
//! * [`security`]: unconditional-security reachability and station trust.
//! * [`cli`]: the `kljn` command-line front end.

pub mod adversary;
pub mod cli;
pub mod error;
pub mod link;
pub mod network;
pub mod noise;
pub mod planner;
pub mod security;
pub mod stats;

pub use error::{KljnError, Result};
