//! Simulation and audit harness for Bell-type experiments.
//!
//! * [`outcomes`]: potential-outcome quadruples and the parity facts behind
//!   the equality form of Bell's inequality.
//! * [`models`]: the hidden-variable model contract and built-in models.
//! * [`engine`]: the randomized-setting trial protocol, parallel or sequential.
//! * [`analysis`]: the Bell statistic, its concentration bound, freedom and
//!   no-signaling audits.
//! * [`hpdensity`]: slab-partitioned densities and the locality audit of the
//!   shared slab index.
//! * [`cli`], [`config`], [`trial_log`]: the command-line front end and its
//!   file formats.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod hpdensity;
pub mod models;
pub mod outcomes;
pub mod rng;
pub mod trial_log;

pub use error::{Error, Result};
