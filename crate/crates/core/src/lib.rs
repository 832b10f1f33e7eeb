//! Monte-Carlo simulator for multi-band cellular coverage in the 6-24 GHz
//! range and for terrestrial interference into LEO satellite uplinks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod beamforming;
pub mod channel;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod linkbudget;
pub mod scenario;

pub use error::{Result, SimError};
