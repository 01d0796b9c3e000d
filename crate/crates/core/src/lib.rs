//! Downlink coverage of a ground user served by a UAV at fixed altitude, with `M`
//! co-channel UAVs moving inside a finite cylinder under a random-waypoint model
//! with pauses.
//!
//! The analytical side ([`coverage`], [`interference`]) evaluates the coverage
//! probability through the Laplace transform of the interference, in closed form
//! for path-loss exponent 2. The [`simulator`] reproduces the same setting by
//! Monte Carlo.

pub mod config;
pub mod coverage;
pub mod distributions;
pub mod error;
pub mod interference;
pub mod jet;
pub mod quadrature;
pub mod simulator;
pub mod special;
pub mod stats;

pub use config::{
    derive_stay_probability, AltitudeBand, FadingConfig, MobilityConfig, NetworkConfig,
};
pub use coverage::{coverage_probability, coverage_sweep, CoverageQuery, SweepPoint};
pub use distributions::{AltitudePdf, DistanceDistribution, Phase};
pub use error::{Error, Result};
pub use interference::{laplace_transform, upsilon, UpsilonTerm};
pub use jet::Jet;
pub use simulator::{run_campaign, run_replications, BoundaryRule, Campaign, SimConfig, Tally};

/// Decibels to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
