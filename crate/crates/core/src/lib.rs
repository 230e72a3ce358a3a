//! Energy-retrofit evaluation for mid-rise residential buildings.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: building description (envelope, systems, loads, fuel mapping) and validation.
//! - [`sim`]: monthly degree-day energy model producing an [`enduse::EndUseTable`], plus calibration.
//! - [`measures`]: the retrofit catalog as pure building transformations with capital-cost bases.
//! - [`econ`]: tariffs, carbon-tax schedule, emission factors, NPV and life-cycle cost.
//! - [`analysis`]: per-measure deltas, cumulative waterfalls, rankings and Pareto packages.
//! - [`io`]: scenario configuration, end-use CSV import and report writers.
//! - [`cli`]: the `retrofit-lcc` command-line entry point.
//!
//! All computation is in SI units with energy in GJ, money in CAD and emissions in tCO₂e.

pub mod analysis;
pub mod cli;
pub mod econ;
pub mod enduse;
pub mod error;
pub mod io;
pub mod measures;
pub mod model;
pub mod sim;
pub mod units;

pub use error::{Error, Result};
