//! Resource allocation for a cooperative cognitive wireless-powered network.
//!
//! A primary user (PU) shares its band with secondary users (SUs) that
//! harvest energy from the PU and from their access point, then jam
//! eavesdroppers while one of them transmits. The allocation maximises the
//! ergodic SU rate subject to a cap on the PU secrecy-outage probability.

pub mod bcd;
pub mod checks;
pub mod config;
pub mod dual;
pub mod error;
pub mod golden;
pub mod harness;
pub mod model;
pub mod oracles;
pub mod rates;
pub mod subproblems;
pub mod variants;

pub use config::NetworkConfig;
pub use error::{Error, Result};
pub use model::FadingState;
pub use rates::{Allocation, SecrecyMode};
