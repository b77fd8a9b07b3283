//! Monte Carlo posterior sampling of the score and highest-posterior-density
//! interval estimation.
//!
//! The HPD interval of coverage `1 - rho` is approximated on a sorted sample
//! of `n` posterior draws as the shortest window `[v[j], v[j + m]]` with
//! `m = floor((1 - rho) * n)`, scanning all starting points. Ties pick the
//! lowest window, so the result is deterministic.

use crate::error::{Error, Result};
use crate::model::{CredibleInterval, DirichletParams, IntervalMethod};
use crate::rvgen::{dirichlet_draw, RngStream};

/// A sorted Monte Carlo sample of the posterior net promoter score.
#[derive(Debug, Clone, PartialEq)]
pub struct NpsSample {
    draws: Vec<f64>,
}

impl NpsSample {
    /// Takes ownership of raw draws, sorts them, and validates the range.
    pub fn from_draws(mut draws: Vec<f64>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::EmptySample);
        }
        if draws.iter().any(|d| !d.is_finite() || d.abs() > 1.0) {
            return Err(Error::InvalidSample);
        }
        draws.sort_unstable_by(f64::total_cmp);
        Ok(Self { draws })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Draws in ascending order.
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn mean(&self) -> f64 {
        self.draws.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        self.draws
            .iter()
            .map(|d| (d - mean) * (d - mean))
            .sum::<f64>()
            / (n - 1) as f64
    }
}

/// Draw `n_draws` values of the score `t3 - t1` under `theta ~ Dir(p)`,
/// returned sorted ascending.
///
/// Draws are consumed sequentially from `stream`; callers that want to
/// parallelize across several samples should fork substreams.
pub fn sample_delta(stream: &mut RngStream, p: &DirichletParams, n_draws: usize) -> NpsSample {
    assert!(n_draws >= 1, "n_draws must be at least 1");
    let mut draws: Vec<f64> = (0..n_draws)
        .map(|_| dirichlet_draw(stream, p).nps())
        .collect();
    draws.sort_unstable_by(f64::total_cmp);
    NpsSample { draws }
}

fn validate_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRho(rho))
    }
}

/// Round-to-integer snapping so decimal fractions like 0.05 behave as their
/// exact rational intent instead of their nearest-double neighbour.
fn snap_ceil(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

fn snap_floor(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// Window span `m = floor((1 - rho) * n)`, computed as `n - ceil(rho * n)`.
fn window_span(n: usize, rho: f64) -> usize {
    n - snap_ceil(rho * n as f64).clamp(1, n)
}

fn check_sample_size(sample: &NpsSample, rho: f64) -> Result<usize> {
    validate_rho(rho)?;
    let n = sample.len();
    let needed = snap_ceil(1.0 / rho);
    if n < needed {
        return Err(Error::SampleTooSmall { needed, actual: n });
    }
    Ok(n)
}

/// Shortest-window HPD interval of coverage `1 - rho`.
///
/// Errors when the sample has fewer than `ceil(1 / rho)` draws.
pub fn hpd_interval(sample: &NpsSample, rho: f64) -> Result<CredibleInterval> {
    let n = check_sample_size(sample, rho)?;
    let m = window_span(n, rho);
    let v = sample.draws();
    let mut best_j = 0;
    let mut best_len = f64::INFINITY;
    for j in 0..(n - m) {
        let len = v[j + m] - v[j];
        if len < best_len {
            best_len = len;
            best_j = j;
        }
    }
    Ok(CredibleInterval {
        lower: v[best_j],
        upper: v[best_j + m],
        method: IntervalMethod::Hpd,
        level_or_gamma: 1.0 - rho,
        clipped: false,
    })
}

/// Length of the HPD interval: upper minus lower bound.
pub fn hpd_length(sample: &NpsSample, rho: f64) -> Result<f64> {
    hpd_interval(sample, rho).map(|iv| iv.length())
}

/// Equal-tailed bounds `(Q(rho / 2), Q(1 - rho / 2))` on the same sample,
/// using the inverse-CDF order statistic `Q(q) = v[ceil(q n) - 1]`.
///
/// Always at least as long as the HPD interval; mainly useful for checking
/// that property and for comparison output.
pub fn equal_tailed_bounds(sample: &NpsSample, rho: f64) -> Result<(f64, f64)> {
    let n = check_sample_size(sample, rho)?;
    let v = sample.draws();
    let half = rho * n as f64 / 2.0;
    let lo_idx = snap_ceil(half).max(1) - 1;
    let hi_idx = n - snap_floor(half).min(n - 1) - 1;
    Ok((v[lo_idx], v[hi_idx.max(lo_idx)]))
}
