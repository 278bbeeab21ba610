//! Kernel density estimation: kernel catalog, the n^{-1/3} bandwidth
//! schedule, dispersion rules, and the sup-error rate diagnostic.

use crate::core::{DispersionRule, Error, KernelKind, QuantileSpec, Result, Sample, TestConfig};
use crate::quantiles::sample_quantile;

const SQRT_2PI: f64 = 2.5066282746310002;

/// IQR of the standard normal; divides the IQR to put it on the
/// standard-deviation scale.
pub const NORMAL_IQR: f64 = 1.349;

/// A kernel function satisfying: K is a symmetric density, Lipschitz
/// of order 1, with finite first absolute moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelFn {
    pub kind: KernelKind,
}

impl KernelFn {
    pub fn new(kind: KernelKind) -> Self {
        Self { kind }
    }

    /// Per-kind Lipschitz constant: sup |K'|.
    /// Gaussian: 1/sqrt(2*pi*e); Epanechnikov: 3/2 at the support edge.
    pub fn lipschitz_bound(self) -> f64 {
        match self.kind {
            KernelKind::Gaussian => 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt(),
            KernelKind::Epanechnikov => 1.5,
        }
    }
}

/// Evaluates the kernel at u.
pub fn kernel_eval(kernel: KernelFn, u: f64) -> f64 {
    match kernel.kind {
        KernelKind::Gaussian => (-0.5 * u * u).exp() / SQRT_2PI,
        KernelKind::Epanechnikov => {
            if u.abs() >= 1.0 {
                0.0
            } else {
                0.75 * (1.0 - u * u)
            }
        }
    }
}

/// A positive smoothing bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be positive, got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Bandwidth schedule `b_n = const * dispersion * n^{-1/3}`.
///
/// The exponent -1/3 is the unique power law compatible with all three
/// bandwidth conditions: `n b_n / log n -> inf` needs exponent < 1,
/// `n^{1/2} b_n^{3/2} (log n)^{-1/2} -> 0` needs exponent >= 1/3, and
/// summability of `b_n^{-9/2} (log n)^{-3/2} n^{-5/2}` needs <= 1/3.
pub fn select_bandwidth(n: usize, config: &TestConfig, dispersion: f64) -> Result<Bandwidth> {
    if !(dispersion > 0.0) {
        return Err(Error::ZeroDispersion(format!("dispersion {dispersion}")));
    }
    Bandwidth::new(config.bandwidth_const * dispersion * (n as f64).powf(-1.0 / 3.0))
}

/// Data scale used by the bandwidth: stddev, or min(stddev, IQR/1.349).
pub fn dispersion_estimate(sample: &Sample, rule: DispersionRule) -> Result<f64> {
    let v = sample.values();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();

    let disp = match rule {
        DispersionRule::Stddev => sd,
        DispersionRule::Robust => {
            let q3 = sample_quantile(sample, QuantileSpec::new(0.75).unwrap());
            let q1 = sample_quantile(sample, QuantileSpec::new(0.25).unwrap());
            let iqr_scale = (q3 - q1) / NORMAL_IQR;
            if iqr_scale > 0.0 {
                sd.min(iqr_scale)
            } else {
                sd
            }
        }
    };
    if disp > 0.0 {
        Ok(disp)
    } else {
        Err(Error::ZeroDispersion(sample.label().to_string()))
    }
}

/// Kernel density estimate `(1/(n b)) sum_j K((x - X_j)/b)`.
///
/// Naive O(n) sum; the test only queries one point per group.
pub fn kde_evaluate(sample: &Sample, b: Bandwidth, kernel: KernelFn, x: f64) -> f64 {
    let bw = b.value();
    let sum: f64 = sample
        .values()
        .iter()
        .map(|&xj| kernel_eval(kernel, (x - xj) / bw))
        .sum();
    sum / (sample.n() as f64 * bw)
}

/// Almost-sure sup-error rate of the KDE on compacts:
/// `Psi(n) = sqrt(log n / (n b_n))`.
pub fn sup_error_rate(n: usize, b: Bandwidth) -> f64 {
    let nf = n as f64;
    (nf.ln() / (nf * b.value())).sqrt()
}
