//! Amplitude estimation, biased-oracle amplification and amplitude or
//! probability filtering on an exact statevector simulator, with per-oracle
//! query ledgers.

pub mod amp_est;
pub mod apps;
pub mod biased_aa;
pub mod error;
pub mod filters;
pub mod gadgets;
pub mod hadamard;
pub mod mdist;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
