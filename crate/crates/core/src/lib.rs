//! Discrete-time Bayesian nonparametric inference for competing risks.
//!
//! The prior is the subdistribution beta-Stacy (SBS) process: a random
//! collection of subdistribution functions built from independent Dirichlet
//! stick-breaking weights, one vector per time bin. The crate provides the
//! process itself, its reinforced-urn representation, conjugate posterior
//! updates for right-censored data, a regression model that centers the
//! process on a parametric family, and a simulation harness.

pub mod classical;
pub mod dirichlet;
pub mod error;
pub mod grid;
pub mod io;
pub mod posterior;
pub mod process;
pub mod regression;
pub mod sim;
pub mod special;
pub mod subdist;
pub mod urn;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use process::{CenteredSbs, SbsParameters};
pub use subdist::{CumulativeHazards, SubdistributionFunction};
