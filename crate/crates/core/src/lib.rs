//! Monte Carlo simulator for two-user downlink NOMA served by a mmWave UAV
//! base station with a limited vertical beamwidth.
//!
//! The pipeline for one drop is: sample users ([`population`]), compute
//! their effective beamformed gains ([`channel`]), check which users the
//! beam footprint reaches ([`geometry`]) and apply the NOMA/OMA decoding
//! rules ([`noma`]). [`montecarlo`] averages drops, searches the boresight
//! and sweeps altitude; [`cli`] is the command line front end.

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod noma;
pub mod output;
pub mod population;
pub mod validate;

pub use error::{Error, Result};
