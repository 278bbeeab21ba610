//! Chi-square distribution functions (in-house incomplete gamma) and
//! the SPD tridiagonal linear algebra behind the quadratic form.

use crate::core::{Error, Result};

const MAX_ITER: usize = 300;
const TERM_TOL: f64 = 1e-14;
const PIVOT_FLOOR: f64 = 1e-300;

/// Regularized lower incomplete gamma P(a, x), by series for
/// x < a + 1 and Lentz continued fraction otherwise.
fn regularized_gamma_p(a: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // Series: P(a,x) = x^a e^{-x} / Gamma(a) * sum_{k>=0} x^k / (a(a+1)...(a+k))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..MAX_ITER {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * TERM_TOL {
                return Ok((ln_prefactor.exp() * sum).clamp(0.0, 1.0));
            }
        }
        Err(Error::GammaNoConvergence)
    } else {
        // Lentz's method for the continued fraction of Q(a,x).
        let tiny = 1e-30;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < TERM_TOL {
                let q = ln_prefactor.exp() * h;
                return Ok((1.0 - q).clamp(0.0, 1.0));
            }
        }
        Err(Error::GammaNoConvergence)
    }
}

/// Lanczos approximation of ln Gamma, g = 7, n = 9.
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + i as f64 + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Chi-square CDF with `df` degrees of freedom.
pub fn chi2_cdf(x: f64, df: usize) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::NegativeInput(x));
    }
    regularized_gamma_p(df as f64 / 2.0, x / 2.0)
}

/// Chi-square quantile: the x with `chi2_cdf(x, df) = q`, by
/// bracketing plus bisection refined to 1e-10 in x.
pub fn chi2_quantile(q: f64, df: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidProbability(q));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let mut hi = df as f64 + 10.0;
    while chi2_cdf(hi, df)? < q {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf(mid, df)? < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Symmetric tridiagonal matrix stored as main diagonal and the
/// single off-diagonal. SPD is verified when factorizing.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }
}

/// Builds the (k-1)x(k-1) tridiagonal `A diag(sigma2) A^T` for the
/// successive-difference contrast matrix A:
/// `diag_i = sigma2_i + sigma2_{i+1}`, `off_i = -sigma2_{i+1}`.
pub fn contrast_covariance(sigma_diag: &[f64]) -> Result<SymTridiag> {
    if sigma_diag.len() < 2 {
        return Err(Error::TooFewGroups(sigma_diag.len()));
    }
    if let Some(&bad) = sigma_diag.iter().find(|&&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::NonpositiveVariance(bad));
    }
    let k = sigma_diag.len();
    let diag = (0..k - 1)
        .map(|i| sigma_diag[i] + sigma_diag[i + 1])
        .collect();
    let off = (0..k - 2).map(|i| -sigma_diag[i + 1]).collect();
    Ok(SymTridiag::new(diag, off))
}

/// Solves `T x = rhs` for SPD tridiagonal T by LDL^T (Thomas)
/// factorization in O(k). Errors if a pivot is not safely positive.
pub fn spd_tridiag_solve(t: &SymTridiag, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = t.dim();
    assert_eq!(rhs.len(), m);
    // Factor T = L D L^T: d holds pivots, l the unit subdiagonal.
    let mut d = vec![0.0; m];
    let mut l = vec![0.0; m.saturating_sub(1)];
    d[0] = t.diag[0];
    if !(d[0] > PIVOT_FLOOR) {
        return Err(Error::NotPositiveDefinite { row: 0, pivot: d[0] });
    }
    for i in 1..m {
        l[i - 1] = t.off[i - 1] / d[i - 1];
        d[i] = t.diag[i] - l[i - 1] * t.off[i - 1];
        if !(d[i] > PIVOT_FLOOR) {
            return Err(Error::NotPositiveDefinite { row: i, pivot: d[i] });
        }
    }
    // Forward solve L z = rhs, scale by D, back solve L^T x = z.
    let mut x = rhs.to_vec();
    for i in 1..m {
        x[i] -= l[i - 1] * x[i - 1];
    }
    for i in 0..m {
        x[i] /= d[i];
    }
    for i in (0..m - 1).rev() {
        x[i] -= l[i] * x[i + 1];
    }
    Ok(x)
}

/// The quadratic form `d^T T^{-1} d`; nonnegative for SPD T.
pub fn quadratic_form(d: &[f64], t: &SymTridiag) -> Result<f64> {
    let x = spd_tridiag_solve(t, d)?;
    let q: f64 = d.iter().zip(&x).map(|(a, b)| a * b).sum();
    // Rounding can push an exact zero slightly negative.
    Ok(q.max(0.0))
}
