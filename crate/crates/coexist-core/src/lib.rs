//! Coexistence analysis for multi-RAT networks sharing unlicensed-band channels.
//!
//! Two subsystems cover the same quantities from independent directions:
//!
//! * [`analytic`] evaluates the closed forms — per-RAT transmit probability
//!   under CSMA channel contention, SIR success probability under nearest-AP
//!   association with Rayleigh fading, the coexisting success probability,
//!   and the coexisting throughput (per-channel sum of spectrum efficiencies).
//! * [`geometry`] + [`montecarlo`] estimate the same quantities by dropping
//!   Poisson point patterns, running channel contention (independent-thinning
//!   or Matérn hard-core CSMA), and measuring SIR at a typical user in the
//!   window centre.
//!
//! [`optimizer`] finds the AP-density ratio that maximizes the coexisting
//! success probability (feasibility constraint, closed-form weighted ratio,
//! and the coupled fixed point for the raw density ratio).
//!
//! The crate is `no_std` + `alloc`; all I/O, file formats, and parallel drop
//! execution live in the companion `coexist-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytic;
pub mod geometry;
pub mod model;
pub mod montecarlo;
pub mod numeric;
pub mod optimizer;

pub use analytic::{AnalyticIntermediates, AnalyticReport};
pub use model::{validate, FadingModel, NetworkConfig, RatId, RatParams, ValidConfig};
pub use montecarlo::{ContentionMode, McEstimate, McSettings};
