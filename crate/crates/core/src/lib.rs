//! Simulation and verification of Gromov–Hausdorff limits for bridge random
//! walks whose dimension grows with the number of steps.
//!
//! The crate is organised bottom-up:
//!
//! - [`increments`]: increment laws (square-integrable and heavy-tailed) and
//!   their scaling constants.
//! - [`walks`]: paths, bridges, truncated bridges, distance matrices and the
//!   algebraic decomposition diagnostics.
//! - [`limits`]: the limiting pseudo-metric spaces, including a LePage-series
//!   subordinator sampler.
//! - [`gh`]: Gromov–Hausdorff bounds, a brute-force oracle for tiny spaces and
//!   Hausdorff distance between clouds.
//! - [`harness`]: Monte Carlo studies and their reports.
//! - [`cli`]: the command-line front end used by the `bridgelab` binary.

pub mod cli;
pub mod csv;
pub mod error;
pub mod gh;
pub mod harness;
pub mod increments;
pub mod limits;
pub mod rng;
pub mod walks;

pub use error::{Error, Result};
pub use gh::GhBoundReport;
pub use harness::{ConvergenceReport, KsResult, StudyConfig, StudyKind};
pub use increments::{Family, IncrementModel, LevyMeasure};
pub use limits::{LimitMetricKind, SubordinatorSample};
pub use rng::StreamKey;
pub use walks::{BridgeCloud, DistanceMatrix, IncrementBatch, PathMatrix};
