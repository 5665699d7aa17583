use thiserror::Error;

use crate::lattice::Site;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("construction step {step}: {reason}")]
    Construction { step: usize, reason: String },
    #[error("quantile argument {0} outside [0, 1)")]
    QuantileDomain(f64),
    #[error("site ({}, {}) lies outside the window", .0.x, .0.y)]
    OutsideWindow(Site),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("shape exceeds the l1 unit ball by {excess:.3e} (tolerance {tol:.1e})")]
    ExceedsUnitBall { excess: f64, tol: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("all {0} runs died before the horizon")]
    AllRunsDied(usize),
    #[error("survival curve does not bracket the critical point: {0}")]
    NotBracketed(String),
    #[error("every trial was clipped by the window ({0} trials)")]
    AllClipped(usize),
    #[error("invalid seeds: {0}")]
    InvalidSeeds(String),
    #[error("target set is empty after clipping to the window")]
    EmptyTarget,
    #[error("geodesic to target {0} touches the window boundary")]
    GeodesicClipped(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
