//! A consistent, asymptotically distribution-free k-sample test for
//! equality of medians (and general quantiles).
//!
//! The test statistic is a quadratic form in successive quantile
//! differences, weighted by the inverse of a plug-in covariance built
//! from kernel density estimates at the sample quantiles. Under the
//! null of equal quantiles the statistic is asymptotically chi-square
//! with `k - 1` degrees of freedom.
//!
//! The crate is organized as:
//! - [`core`]: samples, configuration, outcomes, validation
//! - [`quantiles`]: order-statistic quantiles, ECDF, Bahadur decomposition
//! - [`density`]: kernels, bandwidth schedule, KDE
//! - [`numerics`]: chi-square CDF/quantile, SPD tridiagonal solves
//! - [`inference`]: the test itself and its diagnostics
//! - [`montecarlo`]: seeded variate generation and power studies
//! - [`io`]: CSV ingestion, JSON reports, SVG plots for the CLI

pub mod core;
pub mod density;
pub mod inference;
pub mod io;
pub mod montecarlo;
pub mod numerics;
pub mod quantiles;

pub use crate::core::{Error, QuantileSpec, Sample, TestConfig, TestOutcome};
pub use crate::inference::median_test;
