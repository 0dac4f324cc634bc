//! QoS-aware probabilistic caching and distance-threshold user association
//! for cache-enabled mmWave D2D networks, with quadrature-based performance
//! analysis and a seeded Monte Carlo simulator.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, parallel sweeps
//! and the command line live in the `mmcache` crate.

#![no_std]
// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod association;
pub mod error;
pub mod model;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod placement;
pub mod quad;
pub mod sim;
pub mod system;

pub use error::{Error, Result};
