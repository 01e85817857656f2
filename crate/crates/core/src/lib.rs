//! Compressive-sensing opportunistic feedback for random-beamforming MIMO
//! broadcast channels.
//!
//! Users whose SINR clears a threshold transmit simultaneously over a small
//! number of shared feedback channels; the base station recovers the sparse
//! set of strong users by sparse recovery and schedules one user per beam.

// `!(x > 0.0)` guards reject NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod error;
pub mod protocol;
pub mod quad;
pub mod rbf;
pub mod recovery;
pub mod rng;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
pub use rng::Rng;
