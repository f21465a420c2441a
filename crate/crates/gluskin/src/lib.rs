//! Std companion of `gluskin-core`: rayon-parallel Monte Carlo, the
//! experiment harnesses, JSON/CSV records and the `gluskin` command line.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod parallel;
pub mod record;

pub use record::ExperimentRecord;
