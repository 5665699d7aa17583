//! Experiment runner for the lattice growth library: typed configs, atomic
//! artifact writing, sweeps, and SVG figures.

pub mod config;
pub mod error;
pub mod experiments;
pub mod run;
pub mod svg;

pub use config::{ExperimentConfig, Kind, Overrides};
pub use error::ExpError;
pub use run::{run, sweep, ResultArtifact, SweepEntry, SweepReport};
