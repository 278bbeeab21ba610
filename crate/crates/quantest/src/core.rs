//! Domain types and validation shared by every other module.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("at least two groups are required, got {0}")]
    TooFewGroups(usize),
    #[error("group '{label}' has {n} observations, at least 2 required")]
    TooFewObservations { label: String, n: usize },
    #[error("group '{label}' contains a non-finite value at index {index}")]
    NonFiniteValue { label: String, index: usize },
    #[error("dispersion is zero (constant sample '{0}')")]
    ZeroDispersion(String),
    #[error("density estimate at the quantile of group '{label}' is {value:e}, below the floor 1e-12")]
    DegenerateDensity { label: String, value: f64 },
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("negative input to chi-square CDF: {0}")]
    NegativeInput(f64),
    #[error("probability must lie in [0,1), got {0}")]
    InvalidProbability(f64),
    #[error("density at the true quantile must be positive, got {0}")]
    NonpositiveDensity(f64),
    #[error("variance entries must be positive, got {0}")]
    NonpositiveVariance(f64),
    #[error("scale parameter must be positive, got {0}")]
    NonpositiveScale(f64),
    #[error("incomplete gamma iteration failed to converge")]
    GammaNoConvergence,
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("parse error in {path} at row {row}, column {col}: {message}")]
    Parse {
        path: String,
        row: usize,
        col: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// One group's observations. Values are sorted ascending at
/// construction, so order statistics are available by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    label: String,
    values: Vec<f64>,
}

impl Sample {
    /// Builds a sample, validating finiteness and minimum size and
    /// sorting the values.
    pub fn new(label: impl Into<String>, mut values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if values.len() < 2 {
            return Err(Error::TooFewObservations {
                label,
                n: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { label, index });
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { label, values })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Observations in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }
}

/// Quantile level in (0,1). The default 1/2 is the median case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileSpec {
    p: f64,
}

impl QuantileSpec {
    pub const MEDIAN: QuantileSpec = QuantileSpec { p: 0.5 };

    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "quantile level must lie in (0,1), got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn p(self) -> f64 {
        self.p
    }
}

impl Default for QuantileSpec {
    fn default() -> Self {
        Self::MEDIAN
    }
}

/// Kernel choices for the density estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Gaussian,
    Epanechnikov,
}

/// Rule for the data-driven scale that multiplies the bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DispersionRule {
    /// Sample standard deviation (divisor n-1).
    Stddev,
    /// min(stddev, IQR / 1.349); stays finite for heavy-tailed data.
    Robust,
}

/// Test configuration: quantile level, significance, kernel and
/// bandwidth choices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub quantile: QuantileSpec,
    pub alpha: f64,
    pub kernel: KernelKind,
    pub bandwidth_const: f64,
    pub dispersion_rule: DispersionRule,
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if !(self.bandwidth_const > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth constant must be positive, got {}",
                self.bandwidth_const
            )));
        }
        Ok(())
    }
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            quantile: QuantileSpec::MEDIAN,
            alpha: 0.05,
            kernel: KernelKind::Gaussian,
            bandwidth_const: 1.0,
            dispersion_rule: DispersionRule::Robust,
        }
    }
}

/// Full result of one test run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    /// Quadratic-form statistic T.
    pub statistic: f64,
    /// Degrees of freedom, k - 1.
    pub df: usize,
    pub p_value: f64,
    pub reject: bool,
    /// Sample quantile per group.
    pub medians: Vec<f64>,
    /// Kernel density estimate at each group's sample quantile.
    pub density_at_median: Vec<f64>,
    /// Bandwidth used per group.
    pub bandwidths: Vec<f64>,
    /// Sample-size ratios n_i / n_1.
    pub lambda_hat: Vec<f64>,
}

/// Checks the group-level invariants: k >= 2 and every sample valid.
/// `Sample` construction already enforces per-sample invariants, so
/// this only has the group count left to check.
pub fn validate_samples(samples: Vec<Sample>) -> Result<Vec<Sample>> {
    if samples.len() < 2 {
        return Err(Error::TooFewGroups(samples.len()));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_samples_pass_through_sorted() {
        let a = Sample::new("a", vec![3.0, 1.0, 2.0]).unwrap();
        let b = Sample::new("b", vec![5.0, 4.0]).unwrap();
        let out = validate_samples(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(out, vec![a, b]);
        assert_eq!(out[0].values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn one_group_is_too_few() {
        let a = Sample::new("a", vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            validate_samples(vec![a]),
            Err(Error::TooFewGroups(1))
        ));
    }

    #[test]
    fn nan_rejected() {
        assert!(matches!(
            Sample::new("a", vec![1.0, f64::NAN]),
            Err(Error::NonFiniteValue { .. })
        ));
        assert!(matches!(
            Sample::new("a", vec![1.0, f64::INFINITY]),
            Err(Error::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn single_observation_rejected() {
        assert!(matches!(
            Sample::new("a", vec![1.0]),
            Err(Error::TooFewObservations { n: 1, .. })
        ));
    }

    #[test]
    fn validate_is_idempotent_and_sort_preserves_multiset() {
        let vals = vec![2.0, -1.0, 2.0, 0.5];
        let s = Sample::new("a", vals.clone()).unwrap();
        let t = Sample::new("b", vec![0.0, 1.0]).unwrap();
        let once = validate_samples(vec![s.clone(), t.clone()]).unwrap();
        let twice = validate_samples(once.clone()).unwrap();
        assert_eq!(once, twice);

        let mut sorted_input = vals;
        sorted_input.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(s.values(), sorted_input.as_slice());
    }

    #[test]
    fn alpha_out_of_range_rejected() {
        let cfg = TestConfig {
            alpha: 1.5,
            ..TestConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
