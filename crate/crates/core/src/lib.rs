//! Anti-jamming receive beamforming with 2-bit (QPSK) phase-only weights.
//!
//! The crate simulates satellite-plus-jammer snapshots on a uniform circular
//! array, estimates sample covariance, and selects per-antenna weights from
//! the four-point constellation `{1+j, 1-j, -1+j, -1-j} / sqrt(2N)`. Solvers
//! range from naive quantization of the continuous Capon solution through an
//! exhaustive oracle, random sampling, and coordinate descent, up to a
//! gradient-boosted-tree policy distilled from oracle labels. A benchmark
//! harness compares them over randomized scenarios and exports beampattern
//! grids.

pub mod array;
pub mod beamformer;
pub mod bench;
pub mod config;
pub mod error;
pub mod gbdt;
pub mod linalg;
pub mod policy;
pub mod seed;

pub use error::{Error, Result};

/// Crate version, embedded in file artifacts for provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
