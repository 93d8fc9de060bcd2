//! Capacitated facility location with scarce capacity.
//!
//! Facilities with limited capacity are placed on the reports of `n`
//! agents; total capacity falls short of `n`, so agents then compete in a
//! first-come-first-served game for service. This crate provides:
//!
//! - the game itself: outcome resolution, equilibrium construction,
//!   exhaustive equilibrium enumeration, and stability checking ([`fcfs`]);
//! - the percentile mechanism family with its stability conditions and
//!   tailored best vectors ([`mechanisms`]);
//! - closed-form worst-case ratios, extremal instance generators, a
//!   matching-based optimal-welfare upper bound, and a misreport auditor
//!   ([`analysis`]);
//! - the planar extension ([`planar`]);
//! - a seeded Monte-Carlo harness for expected-ratio experiments
//!   ([`harness`]).

pub mod analysis;
pub mod assignment;
pub mod distribution;
pub mod error;
pub mod fcfs;
pub mod harness;
pub mod instance;
pub mod mechanisms;
pub mod planar;

pub use error::{Error, Result};
pub use instance::{make_instance, CapacityVector, Instance};
