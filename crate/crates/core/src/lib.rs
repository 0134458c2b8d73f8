//! Hypercube cache placement and one-shot linear delivery for cache-aided
//! interference networks.
//!
//! The library covers the full pipeline:
//!
//! - [`combinatorics`] — dimension partitions and (circular) hypercube
//!   permutation enumeration;
//! - [`placement`] — parameter validation, file splitting into subfiles, and
//!   transmitter/receiver cache manifests;
//! - [`scheduler`] — per-demand packet splitting and the grouping of packets
//!   into interference-free delivery steps, with exact-cover verification;
//! - [`phy`] — channel sampling, per-packet zero-forcing precoder solves, and
//!   numerical decode verification of every step;
//! - [`analytics`] — closed-form subpacketization/gap formulas, the
//!   memory-sharing planner, and parameter sweeps.

pub mod analytics;
pub mod combinatorics;
pub mod error;
pub mod phy;
pub mod placement;
pub mod scheduler;

mod linalg;
