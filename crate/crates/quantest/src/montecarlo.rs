//! Seeded random variate generation and the level/power experiments.
//!
//! Every replication draws from its own substream, derived
//! deterministically from (seed, delta index, rep index) by a
//! SplitMix64 mix into a ChaCha8 stream. Results are therefore
//! reproducible bit for bit regardless of worker count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{Error, Result, Sample, TestConfig};
use crate::inference::median_test;

/// Distribution families used in the power studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Cauchy,
}

/// Configuration of one power experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub family: Family,
    /// Group count; groups 2..k are all shifted by delta.
    pub k: usize,
    /// Per-group sample size.
    pub n: usize,
    /// Nondecreasing grid of shift values.
    pub deltas: Vec<f64>,
    /// Replications per delta.
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::TooFewGroups(self.k));
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be >= 2, got {}", self.n)));
        }
        if self.reps < 1 {
            return Err(Error::InvalidConfig("reps must be >= 1".into()));
        }
        if self.deltas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidConfig("deltas must be nondecreasing".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            family: Family::Normal,
            k: 2,
            n: 1000,
            deltas: (0..=20).map(|i| i as f64 * 0.025).collect(),
            reps: 1000,
            alpha: 0.05,
            seed: 0,
        }
    }
}

/// One point of a power curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub delta: f64,
    /// Rejection fraction among successful replications.
    pub power: f64,
    /// Binomial Monte Carlo standard error sqrt(p(1-p)/reps).
    pub mc_stderr: f64,
    /// Replications that failed (e.g. degenerate density); reported,
    /// never counted as rejections.
    pub errors: usize,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives the independent substream for (seed, delta index, rep index).
pub fn substream(seed: u64, delta_index: u64, rep_index: u64) -> ChaCha8Rng {
    let mut state = seed;
    let a = splitmix64(&mut state);
    let mut state2 = a ^ delta_index.wrapping_mul(0xd6e8feb86659fd93);
    let b = splitmix64(&mut state2);
    let mut state3 = b ^ rep_index.wrapping_mul(0xa0761d6478bd642f);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state3).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Draws n iid N(mu, sigma^2) variates by the Marsaglia polar method.
pub fn sample_normal<R: Rng>(rng: &mut R, mu: f64, sigma: f64, n: usize) -> Result<Sample> {
    if !(sigma > 0.0) {
        return Err(Error::NonpositiveScale(sigma));
    }
    let mut values = Vec::with_capacity(n);
    let mut spare: Option<f64> = None;
    while values.len() < n {
        if let Some(z) = spare.take() {
            values.push(mu + sigma * z);
            continue;
        }
        let u: f64 = rng.gen_range(-1.0..1.0);
        let v: f64 = rng.gen_range(-1.0..1.0);
        let s = u * u + v * v;
        if s >= 1.0 || s == 0.0 {
            continue;
        }
        let factor = (-2.0 * s.ln() / s).sqrt();
        values.push(mu + sigma * u * factor);
        spare = Some(v * factor);
    }
    Sample::new("normal", values)
}

/// Draws n iid Cauchy(x0, gamma) variates by inverse transform.
pub fn sample_cauchy<R: Rng>(rng: &mut R, x0: f64, gamma: f64, n: usize) -> Result<Sample> {
    if !(gamma > 0.0) {
        return Err(Error::NonpositiveScale(gamma));
    }
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        let u: f64 = rng.gen();
        // The generator's granularity keeps u in [0,1); skip exact 0
        // where tan would blow up to -inf.
        if u == 0.0 {
            continue;
        }
        values.push(cauchy_inverse_cdf(u, x0, gamma));
    }
    Sample::new("cauchy", values)
}

/// Cauchy quantile function `x0 + gamma * tan(pi (u - 1/2))`.
pub fn cauchy_inverse_cdf(u: f64, x0: f64, gamma: f64) -> f64 {
    x0 + gamma * (std::f64::consts::PI * (u - 0.5)).tan()
}

fn draw_group<R: Rng>(rng: &mut R, family: Family, shift: f64, n: usize) -> Result<Sample> {
    match family {
        Family::Normal => sample_normal(rng, shift, 1.0, n),
        Family::Cauchy => sample_cauchy(rng, shift, 1.0, n),
    }
}

fn run_replication(config: &PowerConfig, delta: f64, di: u64, ri: u64) -> Result<bool> {
    let rng = &mut substream(config.seed, di, ri);
    let mut groups = Vec::with_capacity(config.k);
    groups.push(draw_group(rng, config.family, 0.0, config.n)?);
    for _ in 1..config.k {
        groups.push(draw_group(rng, config.family, delta, config.n)?);
    }
    let test_config = TestConfig {
        alpha: config.alpha,
        ..TestConfig::default()
    };
    Ok(median_test(&groups, &test_config)?.reject)
}

/// Runs the full power experiment: for each delta, `reps` independent
/// replications of the k-group test, aggregated in (delta, rep) order.
pub fn power_curve(config: &PowerConfig) -> Result<Vec<PowerPoint>> {
    config.validate()?;
    config
        .deltas
        .iter()
        .enumerate()
        .map(|(di, &delta)| {
            let results: Vec<Result<bool>> = (0..config.reps)
                .into_par_iter()
                .map(|ri| run_replication(config, delta, di as u64, ri as u64))
                .collect();
            let mut rejections = 0usize;
            let mut errors = 0usize;
            for r in &results {
                match r {
                    Ok(true) => rejections += 1,
                    Ok(false) => {}
                    Err(Error::DegenerateDensity { .. }) => errors += 1,
                    Err(_) => errors += 1,
                }
            }
            let effective = config.reps - errors;
            let power = if effective > 0 {
                rejections as f64 / effective as f64
            } else {
                0.0
            };
            Ok(PowerPoint {
                delta,
                power,
                mc_stderr: (power * (1.0 - power) / config.reps as f64).sqrt(),
                errors,
            })
        })
        .collect()
}
