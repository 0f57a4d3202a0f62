//! Finite-shot sampling, percentile bootstrap, and first-order error
//! propagation from outcome frequencies to `gamma` and `F`.

use rand::Rng;

use crate::circuits::ProjectionLabel;
use crate::error::{Error, Result};
use crate::metrics::{self, GammaSet, ProjectionProbabilities};

/// Two-sided normal quantile for a 95% interval.
pub const Z_95: f64 = 1.96;
pub const DEFAULT_CI_LEVEL: f64 = 0.99;
pub const DEFAULT_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotCounts {
    counts: Vec<u64>,
    n_shots: u64,
}

impl ShotCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let n_shots = counts.iter().sum();
        if n_shots == 0 {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        Ok(Self { counts, n_shots })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_shots(&self) -> u64 {
        self.n_shots
    }
}

/// Multinomial draw of `n_shots` outcomes, one categorical draw per shot.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], n_shots: u64, rng: &mut R) -> Result<ShotCounts> {
    if n_shots == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution(format!("{probs:?}")));
    }
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n_shots {
        let u = rng.random::<f64>() * total;
        let k = cumulative.partition_point(|&c| c <= u).min(last);
        counts[k] += 1;
    }
    ShotCounts::new(counts)
}

pub fn estimate_probs(c: &ShotCounts) -> Vec<f64> {
    let n = c.n_shots as f64;
    c.counts.iter().map(|&k| k as f64 / n).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapCI {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub n_resamples: usize,
}

/// Percentile bootstrap of the sample mean.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    samples: &[f64],
    level: f64,
    n_resamples: usize,
    rng: &mut R,
) -> Result<BootstrapCI> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: samples.len() });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidProbability { name: "confidence level", value: level });
    }
    if n_resamples == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("bootstrap sample"));
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut means: Vec<f64> =
        (0..n_resamples).map(|_| (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64).collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let lo = quantile_sorted(&means, alpha);
    let hi = quantile_sorted(&means, 1.0 - alpha);
    Ok(BootstrapCI { mean, lo: lo.min(mean), hi: hi.max(mean), level, n_resamples })
}

/// Linear interpolation between order statistics.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    match sorted.get(i + 1) {
        Some(next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}

/// Half-width of the 95% normal interval for a frequency over `n` trials.
pub fn delta_p(p: f64, n: u64) -> f64 {
    Z_95 * (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Largest `|dF|` over the sign choices of the `gamma` errors, to first order.
pub fn propagate_f_error(g: &GammaSet, dg01: f64, dg12: f64, dg20: f64) -> f64 {
    let coeff = [2.0 * (g.g01 - g.g12 * g.g20), 2.0 * (g.g12 - g.g01 * g.g20), 2.0 * (g.g20 - g.g01 * g.g12)];
    let deltas = [dg01, dg12, dg20];
    let mut worst = 0.0_f64;
    for signs in 0..8u32 {
        let total: f64 = (0..3)
            .map(|k| {
                let s = if signs & (1 << k) == 0 { 1.0 } else { -1.0 };
                s * deltas[k] * coeff[k]
            })
            .sum();
        worst = worst.max(total.abs());
    }
    worst
}

/// First-order bound on `|d gamma|` for `gamma = (2 p_ij - p_i - p_j) / (2 sqrt(p_i p_j))`.
pub fn propagate_gamma_error(p_ij: f64, p_i: f64, p_j: f64, dp_ij: f64, dp_i: f64, dp_j: f64) -> Result<f64> {
    let g = metrics::gamma(p_ij, p_i, p_j)?;
    let root = (p_i * p_j).sqrt();
    let d_pij = 1.0 / root;
    let d_pi = -1.0 / (2.0 * root) - g / (2.0 * p_i);
    let d_pj = -1.0 / (2.0 * root) - g / (2.0 * p_j);
    Ok(d_pij.abs() * dp_ij.abs() + d_pi.abs() * dp_i.abs() + d_pj.abs() * dp_j.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEstimate {
    /// Per projection, in [`ProjectionLabel::ALL`] order.
    pub delta_p: [f64; 7],
    pub delta_gamma: GammaSet,
    pub delta_f: f64,
    pub confidence: f64,
}

/// Propagates 95% shot-noise intervals of all seven probabilities to the
/// `gamma`s and to `F`.
pub fn estimate_errors(pp: &ProjectionProbabilities, n_shots: u64) -> Result<ErrorEstimate> {
    let dp = ProjectionLabel::ALL.map(|l| delta_p(pp.get(l), n_shots));
    let d = |l: ProjectionLabel| dp[ProjectionLabel::ALL.iter().position(|&m| m == l).unwrap_or(0)];
    use ProjectionLabel::*;
    let delta_gamma = GammaSet {
        g01: propagate_gamma_error(pp.p01, pp.p0, pp.p1, d(P01), d(P0), d(P1))?,
        g12: propagate_gamma_error(pp.p12, pp.p1, pp.p2, d(P12), d(P1), d(P2))?,
        g20: propagate_gamma_error(pp.p20, pp.p2, pp.p0, d(P20), d(P2), d(P0))?,
    };
    let g = metrics::gammas(pp)?;
    let delta_f = propagate_f_error(&g, delta_gamma.g01, delta_gamma.g12, delta_gamma.g20);
    Ok(ErrorEstimate { delta_p: dp, delta_gamma, delta_f, confidence: 0.95 })
}
