//! Reference computations for the test suites.
//!
//! Nothing here calls into `afrelay-core`: the quadrature rules, samplers and
//! KS statistics are written directly from the defining integrals and
//! distributions so they stay independent of the code they check.

pub mod quad;
pub mod sample;
pub mod stats;

pub use quad::{integrate, integrate_2d};
pub use stats::ks_statistic;
