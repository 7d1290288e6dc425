//! Differential entropy from samples via k-NN distances.
//!
//! The estimate for T points in d dimensions is
//!
//! ```text
//! H = psi(T) - psi(k) + log c_d + (d / T) * sum_t log r_t
//! ```
//!
//! with `r_t` the distance from point t to its k-th nearest neighbor and
//! `c_d` the volume of the unit ball of the chosen norm (2^d for the
//! max norm). All quantities are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knn::{knn_radii_auto, Norm, Points};

/// Neighbor count and norm for the entropy estimator. Logs are natural.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub k: usize,
    pub norm: Norm,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            k: 3,
            norm: Norm::Chebyshev,
        }
    }
}

impl EntropyConfig {
    pub fn with_k(k: usize) -> Self {
        EntropyConfig {
            k,
            ..Default::default()
        }
    }
}

/// An entropy estimate in nats together with the configuration that
/// produced it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub k: usize,
    pub norm: Norm,
    pub sample_size: usize,
    pub dims: usize,
}

/// Digamma function for x > 0.
///
/// Upward recurrence pushes the argument to x >= 10, then the asymptotic
/// series in 1/x^2 finishes; absolute error stays below 1e-10.
pub fn digamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0, "digamma argument must be positive");
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0))));
    acc + x.ln() - 0.5 * inv - series
}

/// ln Gamma(half / 2) for positive integer `half`.
fn ln_gamma_half(half: usize) -> f64 {
    match half {
        1 => 0.5 * std::f64::consts::PI.ln(),
        2 => 0.0,
        _ => ((half as f64 - 2.0) / 2.0).ln() + ln_gamma_half(half - 2),
    }
}

/// Natural log of the unit-ball volume in d dimensions under `norm`.
pub fn unit_ball_log_volume(d: usize, norm: Norm) -> f64 {
    match norm {
        Norm::Chebyshev => d as f64 * std::f64::consts::LN_2,
        Norm::Euclidean => {
            (d as f64 / 2.0) * std::f64::consts::PI.ln() - ln_gamma_half(d + 2)
        }
    }
}

/// k-NN entropy estimate of a point sample.
///
/// Errors when any k-NN radius is zero (exact duplicate points); the
/// caller is expected to jitter ties upstream via the random tie policy.
pub fn ksg_entropy(points: &Points, cfg: &EntropyConfig) -> Result<EntropyEstimate> {
    let t = points.len();
    let d = points.dims();
    if cfg.k == 0 || t < cfg.k + 1 {
        return Err(Error::Config(format!(
            "k = {} needs at least k + 1 points, got {}",
            cfg.k, t
        )));
    }
    let radii = knn_radii_auto(points, cfg.k, cfg.norm)?;
    if radii.zero_count > 0 {
        return Err(Error::DegenerateDistances {
            count: radii.zero_count,
        });
    }
    // summed in index order so the result is independent of the parallel
    // schedule used to compute the radii
    let mut log_sum = 0.0;
    for r in &radii.radii {
        log_sum += r.ln();
    }
    let value = digamma(t as f64) - digamma(cfg.k as f64)
        + unit_ball_log_volume(d, cfg.norm)
        + (d as f64 / t as f64) * log_sum;
    Ok(EntropyEstimate {
        value,
        k: cfg.k,
        norm: cfg.norm,
        sample_size: t,
        dims: d,
    })
}
