//! The decision procedure: plug-in covariance, the quadratic-form
//! statistic, and the high-probability approximation diagnostics.

use crate::core::{Error, Result, Sample, TestConfig, TestOutcome};
use crate::density::{dispersion_estimate, kde_evaluate, select_bandwidth, KernelFn};
use crate::numerics::{chi2_cdf, chi2_quantile, contrast_covariance, quadratic_form};
use crate::quantiles::{bahadur_decompose, sample_quantile};

/// Density estimates below this floor make the variance plug-in
/// explode; they are reported as errors instead.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// The diagonal plug-in covariance: entry i is
/// `p(1-p) / (lambda_i * f_i(xi_i)^2)` with `lambda_i = n_i / n_1`.
/// For p = 1/2 this is the usual `1 / (4 lambda_i f_i(M_i)^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaHat {
    pub entries: Vec<f64>,
    /// Sample quantile per group.
    pub quantile_points: Vec<f64>,
    /// KDE value at each quantile point.
    pub density_values: Vec<f64>,
    /// Sample-size ratios n_i / n_1.
    pub lambda_hat: Vec<f64>,
    /// Bandwidth used per group.
    pub bandwidths: Vec<f64>,
}

/// Estimates the plug-in covariance from validated samples.
pub fn estimate_sigma_hat(samples: &[Sample], config: &TestConfig) -> Result<SigmaHat> {
    config.validate()?;
    let p = config.quantile.p();
    let n1 = samples[0].n() as f64;
    let kernel = KernelFn::new(config.kernel);

    let mut entries = Vec::with_capacity(samples.len());
    let mut quantile_points = Vec::with_capacity(samples.len());
    let mut density_values = Vec::with_capacity(samples.len());
    let mut lambda_hat = Vec::with_capacity(samples.len());
    let mut bandwidths = Vec::with_capacity(samples.len());

    for sample in samples {
        let xi = sample_quantile(sample, config.quantile);
        let disp = dispersion_estimate(sample, config.dispersion_rule)?;
        let b = select_bandwidth(sample.n(), config, disp)?;
        let f_hat = kde_evaluate(sample, b, kernel, xi);
        if f_hat <= DENSITY_FLOOR {
            return Err(Error::DegenerateDensity {
                label: sample.label().to_string(),
                value: f_hat,
            });
        }
        let lambda = sample.n() as f64 / n1;
        entries.push(p * (1.0 - p) / (lambda * f_hat * f_hat));
        quantile_points.push(xi);
        density_values.push(f_hat);
        lambda_hat.push(lambda);
        bandwidths.push(b.value());
    }

    Ok(SigmaHat {
        entries,
        quantile_points,
        density_values,
        lambda_hat,
        bandwidths,
    })
}

/// Runs the k-sample quantile-equality test.
///
/// The contrast vector is the successive differences of the sample
/// quantiles in group order; the statistic is
/// `T = n_1 * d^T (A SigmaHat A^T)^{-1} d`, compared against the
/// chi-square with k-1 degrees of freedom.
pub fn median_test(samples: &[Sample], config: &TestConfig) -> Result<TestOutcome> {
    if samples.len() < 2 {
        return Err(Error::TooFewGroups(samples.len()));
    }
    let sigma = estimate_sigma_hat(samples, config)?;
    let k = samples.len();
    let d: Vec<f64> = (0..k - 1)
        .map(|i| sigma.quantile_points[i] - sigma.quantile_points[i + 1])
        .collect();
    let cov = contrast_covariance(&sigma.entries)?;
    let n1 = samples[0].n() as f64;
    let statistic = n1 * quadratic_form(&d, &cov)?;
    let df = k - 1;
    let p_value = 1.0 - chi2_cdf(statistic, df)?;
    let critical = chi2_quantile(1.0 - config.alpha, df)?;
    Ok(TestOutcome {
        statistic,
        df,
        p_value,
        reject: statistic > critical,
        medians: sigma.quantile_points,
        density_at_median: sigma.density_values,
        bandwidths: sigma.bandwidths,
        lambda_hat: sigma.lambda_hat,
    })
}

/// Known-truth inputs for the approximation diagnostics: per group,
/// the true median, the true density at the median, and the true
/// covariance entry.
#[derive(Debug, Clone, Copy)]
pub struct GroupTruth {
    pub median: f64,
    pub density_at_median: f64,
    pub sigma_entry: f64,
}

/// The computable terms of the high-probability statistic bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Diagnostics {
    /// Sum over i of |linear_i - linear_{i+1}| of the Bahadur terms.
    pub bahadur_sum: f64,
    /// max_i |R_{n_i}|.
    pub remainder_max: f64,
    /// Frobenius norm of SigmaHat^{-1} - Sigma^{-1} (diagonal case).
    pub sigma_inv_gap: f64,
    /// |T_hat/n_1 - T_true/n_1|: gap between the quadratic forms built
    /// from estimated and true quantities.
    pub statistic_gap: f64,
}

/// Computes the diagnostic terms from data plus known truth; meant
/// for simulation studies where the generating distributions are known.
pub fn theorem2_diagnostics(
    samples: &[Sample],
    truth: &[GroupTruth],
    config: &TestConfig,
) -> Result<Theorem2Diagnostics> {
    if samples.len() < 2 {
        return Err(Error::TooFewGroups(samples.len()));
    }
    assert_eq!(samples.len(), truth.len());
    let k = samples.len();

    let mut linear = Vec::with_capacity(k);
    let mut remainder_max: f64 = 0.0;
    for (sample, t) in samples.iter().zip(truth) {
        let parts = bahadur_decompose(sample, t.median, t.density_at_median)?;
        linear.push(parts.linear_term);
        remainder_max = remainder_max.max(parts.remainder.abs());
    }
    let bahadur_sum: f64 = (0..k - 1).map(|i| (linear[i] - linear[i + 1]).abs()).sum();

    let sigma_hat = estimate_sigma_hat(samples, config)?;
    let sigma_inv_gap: f64 = sigma_hat
        .entries
        .iter()
        .zip(truth)
        .map(|(&est, t)| {
            if !(t.sigma_entry > 0.0) {
                return Err(Error::NonpositiveVariance(t.sigma_entry));
            }
            Ok((1.0 / est - 1.0 / t.sigma_entry).powi(2))
        })
        .sum::<Result<f64>>()?
        .sqrt();

    let d_hat: Vec<f64> = (0..k - 1)
        .map(|i| sigma_hat.quantile_points[i] - sigma_hat.quantile_points[i + 1])
        .collect();
    let d_true: Vec<f64> = (0..k - 1).map(|i| truth[i].median - truth[i + 1].median).collect();
    let sigma_true: Vec<f64> = truth.iter().map(|t| t.sigma_entry).collect();
    let form_hat = quadratic_form(&d_hat, &contrast_covariance(&sigma_hat.entries)?)?;
    let form_true = quadratic_form(&d_true, &contrast_covariance(&sigma_true)?)?;

    Ok(Theorem2Diagnostics {
        bahadur_sum,
        remainder_max,
        sigma_inv_gap,
        statistic_gap: (form_hat - form_true).abs(),
    })
}
