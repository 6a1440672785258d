//! Statistical analysis and power allocation for dual-hop amplify-and-forward
//! relays with spatially correlated relay antennas.

pub mod benchmark;
pub mod error;
mod expsum;
pub mod linalg;
pub mod montecarlo;
pub mod power;
pub mod snr;
pub mod special;

pub use error::{Error, Result};
