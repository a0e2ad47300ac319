//! Discrimination of three mirror-symmetric qubit states, end to end:
//! optimal minimum-error and maximum-confidence measurements, the bounds
//! attainable without contextuality, compilation of the measurements into
//! a two-step discrete-time quantum walk, the half-wave-plate settings
//! realizing each coin, and a seeded photon-counting emulator for
//! shot-noise studies.
//!
//! The crate is organized the way the problem decomposes:
//!
//! * [`mat2`] / [`model`] - complex 2x2 algebra, states, ensembles, POVMs;
//! * [`strategies`] - optimal measurements, quantum values, noncontextual
//!   bounds, and the independent oracles that cross-check them;
//! * [`walk`] - the walk engine, coin schedules, and schedule/measurement
//!   equivalence checks;
//! * [`optics`] - waveplate realizations and the counting emulator;
//! * [`scan`] - parameter sweeps, equality loci, and figure data files;
//! * [`cli`] - the `qsdwalk` command-line front end.

pub mod cli;
pub mod error;
pub mod mat2;
pub mod model;
pub mod optics;
pub mod rng;
pub mod scan;
pub mod strategies;
pub mod walk;

pub use error::{Error, Result};
