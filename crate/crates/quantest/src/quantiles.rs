//! Order-statistic quantiles, the empirical CDF, and the Bahadur
//! decomposition of a sample median.

use crate::core::{Error, QuantileSpec, Result, Sample};

/// Sample quantile by linear interpolation at position `(n-1)p`.
///
/// For p = 1/2 this reduces to the usual convention: the middle order
/// statistic for odd n, the midpoint of the two central order
/// statistics for even n.
pub fn sample_quantile(sample: &Sample, spec: QuantileSpec) -> f64 {
    let v = sample.values();
    let n = v.len();
    let pos = (n - 1) as f64 * spec.p();
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 || lo + 1 == n {
        v[lo]
    } else {
        v[lo] + frac * (v[lo + 1] - v[lo])
    }
}

/// Empirical CDF: fraction of observations <= x (right-closed).
pub fn empirical_cdf(sample: &Sample, x: f64) -> f64 {
    let v = sample.values();
    // partition_point works because v is sorted ascending.
    let count = v.partition_point(|&obs| obs <= x);
    count as f64 / v.len() as f64
}

/// The pieces of the Bahadur expansion
/// `M_hat - M = (1/2 - F_n(M)) / f(M) + R_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BahadurParts {
    /// `(1/2 - F_n(M)) / f(M)`.
    pub linear_term: f64,
    /// Everything left over; exact by construction.
    pub remainder: f64,
    /// The rate `n^{-3/4} (log n)^{1/2} (log log n)^{1/4}`.
    pub envelope: f64,
}

/// Splits `M_hat - M` into the linear Bahadur term and the remainder,
/// given the true median and the true density at the median.
pub fn bahadur_decompose(
    sample: &Sample,
    true_median: f64,
    true_density_at_median: f64,
) -> Result<BahadurParts> {
    if !(true_density_at_median > 0.0) {
        return Err(Error::NonpositiveDensity(true_density_at_median));
    }
    let n = sample.n() as f64;
    let linear_term = (0.5 - empirical_cdf(sample, true_median)) / true_density_at_median;
    let m_hat = sample_quantile(sample, QuantileSpec::MEDIAN);
    let remainder = m_hat - true_median - linear_term;
    let envelope = n.powf(-0.75) * n.ln().sqrt() * n.ln().ln().powf(0.25);
    Ok(BahadurParts {
        linear_term,
        remainder,
        envelope,
    })
}
