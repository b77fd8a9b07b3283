//! Average-length-criterion sample-size determination.
//!
//! For a prospective survey of `n` respondents, the preposterior expected
//! HPD length is estimated by Monte Carlo: draw `theta` from the prior,
//! draw counts from Mult(n, theta), then measure the HPD length of the
//! resulting posterior; average over `L` replications. The minimum sample
//! size is the smallest `n` whose average does not exceed `l_max`.
//!
//! Common random numbers make the search well behaved: replication `rep`
//! reuses one theta draw (stream keyed by `rep`) at every candidate `n`,
//! while the counts and posterior draws use a stream keyed by `(rep, n)`.
//! The average length at a given `n` is therefore a pure function of
//! `(seed, prior, n, config)`, independent of evaluation order, worker
//! count, and search strategy.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hpd::{hpd_length, sample_delta};
use crate::model::{update_posterior, Counts, DirichletParams};
use crate::rvgen::{dirichlet_draw, multinomial_draw, RngStream};

/// Seed used by the command line when none is given; fixed, never time-based.
pub const DEFAULT_SEED: u64 = 42;
/// Default number of predictive replications (`L`).
pub const DEFAULT_REPLICATIONS: usize = 1000;
/// Default number of posterior draws per replication (`N`).
pub const DEFAULT_POSTERIOR_DRAWS: usize = 1000;
/// Default cap on the searched sample size.
pub const DEFAULT_MAX_N: u64 = 1_000_000;

/// How `min_sample_size` walks the candidate sample sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStrategy {
    /// Step `n = 1, 2, 3, ...` until the criterion holds. Faithful to the
    /// textbook loop but slow for small targets.
    #[serde(rename = "linear")]
    LinearScan,
    /// Double `n` until the criterion holds, bisect the bracket, then pin
    /// the boundary with a local scan. Needs O(log n) evaluations.
    #[serde(rename = "bisect")]
    BracketBisect,
}

/// Settings for the average-length criterion search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlcConfig {
    /// Maximum admissible average HPD length, in (0, 2].
    pub l_max: f64,
    /// One minus the HPD coverage level, in (0, 1).
    pub rho: f64,
    /// Predictive replications per candidate `n` (`L`).
    pub replications: usize,
    /// Posterior draws per replication (`N`).
    pub posterior_draws: usize,
    pub seed: u64,
    pub strategy: SearchStrategy,
    /// Search gives up past this sample size.
    pub max_n: u64,
}

impl Default for AlcConfig {
    fn default() -> Self {
        Self {
            l_max: 0.10,
            rho: 0.05,
            replications: DEFAULT_REPLICATIONS,
            posterior_draws: DEFAULT_POSTERIOR_DRAWS,
            seed: DEFAULT_SEED,
            strategy: SearchStrategy::BracketBisect,
            max_n: DEFAULT_MAX_N,
        }
    }
}

impl AlcConfig {
    pub fn new(l_max: f64, rho: f64) -> Result<Self> {
        let cfg = Self {
            l_max,
            rho,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every invariant; call after building a config by hand.
    pub fn validate(&self) -> Result<()> {
        if !(self.l_max > 0.0 && self.l_max <= 2.0 && self.l_max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "l_max must lie in (0, 2], got {}",
                self.l_max
            )));
        }
        if !(self.rho > 0.0 && self.rho < 1.0 && self.rho.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "rho must lie in (0, 1), got {}",
                self.rho
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        let needed = (1.0 / self.rho).ceil() as usize;
        if self.posterior_draws < needed {
            return Err(Error::InvalidConfig(format!(
                "posterior_draws = {} cannot resolve a {:.0}% interval (need at least {})",
                self.posterior_draws,
                100.0 * (1.0 - self.rho),
                needed
            )));
        }
        if self.max_n == 0 {
            return Err(Error::InvalidConfig("max_n must be at least 1".into()));
        }
        Ok(())
    }
}

/// One scored candidate from the search trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub n: u64,
    pub avg_length: f64,
}

/// Outcome of the minimum-sample-size search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlcResult {
    pub n_min: u64,
    /// Average HPD length at `n_min`; at most `l_max` by construction.
    pub avg_length_at_n: f64,
    /// Every `(n, average length)` pair scored, in evaluation order.
    pub evaluations: Vec<Evaluation>,
    pub config_echo: AlcConfig,
}

/// One draw from the prior predictive (marginal) distribution of outcomes:
/// `theta ~ Dir(prior)` then `counts ~ Mult(n, theta)`.
pub fn predictive_draw(stream: &mut RngStream, prior: &DirichletParams, n: u64) -> Result<Counts> {
    if n == 0 {
        return Err(Error::ZeroSampleSize);
    }
    let theta = dirichlet_draw(stream, prior);
    Ok(multinomial_draw(stream, n, &theta))
}

/// The `L` individual HPD lengths behind one average, in replication order.
///
/// Replications run in parallel on the current rayon pool; order and values
/// are identical regardless of worker count.
pub fn hpd_length_replicates(
    root: &RngStream,
    prior: &DirichletParams,
    n: u64,
    cfg: &AlcConfig,
) -> Vec<f64> {
    assert!(n >= 1, "candidate sample size must be at least 1");
    (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut theta_stream = root.substream(rep);
            let theta = dirichlet_draw(&mut theta_stream, prior);
            let mut data_stream = theta_stream.substream(n);
            let counts = multinomial_draw(&mut data_stream, n, &theta);
            let posterior = update_posterior(prior, &counts);
            let sample = sample_delta(&mut data_stream, &posterior, cfg.posterior_draws);
            hpd_length(&sample, cfg.rho).expect("config guarantees enough posterior draws")
        })
        .collect()
}

/// Monte Carlo estimate of the preposterior expected HPD length at sample
/// size `n`: the mean of [`hpd_length_replicates`]. Lies in [0, 2].
pub fn average_hpd_length(
    root: &RngStream,
    prior: &DirichletParams,
    n: u64,
    cfg: &AlcConfig,
) -> f64 {
    let lengths = hpd_length_replicates(root, prior, n, cfg);
    lengths.iter().sum::<f64>() / lengths.len() as f64
}

struct Search<'a> {
    root: RngStream,
    prior: &'a DirichletParams,
    cfg: &'a AlcConfig,
    memo: HashMap<u64, f64>,
    trace: Vec<Evaluation>,
}

impl Search<'_> {
    fn eval(&mut self, n: u64) -> f64 {
        if let Some(&len) = self.memo.get(&n) {
            return len;
        }
        let len = average_hpd_length(&self.root, self.prior, n, self.cfg);
        self.memo.insert(n, len);
        self.trace.push(Evaluation { n, avg_length: len });
        len
    }

    fn meets(&mut self, n: u64) -> bool {
        self.eval(n) <= self.cfg.l_max
    }
}

/// Smallest sample size whose average HPD length does not exceed `l_max`,
/// under the configured strategy and Monte Carlo budget.
///
/// Errors with [`Error::NonConvergence`] when no `n <= max_n` qualifies.
pub fn min_sample_size(prior: &DirichletParams, cfg: &AlcConfig) -> Result<AlcResult> {
    cfg.validate()?;
    let mut search = Search {
        root: RngStream::new(cfg.seed),
        prior,
        cfg,
        memo: HashMap::new(),
        trace: Vec::new(),
    };

    let n_min = match cfg.strategy {
        SearchStrategy::LinearScan => {
            let mut n = 1;
            loop {
                if search.meets(n) {
                    break n;
                }
                if n >= cfg.max_n {
                    return Err(Error::NonConvergence { cap: cfg.max_n });
                }
                n += 1;
            }
        }
        SearchStrategy::BracketBisect => {
            // Bracket: double until the criterion holds.
            let mut lo = 0u64;
            let mut hi = 1u64;
            while !search.meets(hi) {
                if hi >= cfg.max_n {
                    return Err(Error::NonConvergence { cap: cfg.max_n });
                }
                lo = hi;
                hi = hi.saturating_mul(2).min(cfg.max_n);
            }
            if hi > 1 {
                // Bisect (lo fails, hi holds) down to adjacent candidates.
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if search.meets(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                // Pin the boundary: walk down while the criterion still
                // holds, then up while it fails (the latter is a no-op
                // unless the walk-down overshot a noisy dip).
                while hi > 1 && search.meets(hi - 1) {
                    hi -= 1;
                }
                while !search.meets(hi) {
                    hi += 1;
                    if hi > cfg.max_n {
                        return Err(Error::NonConvergence { cap: cfg.max_n });
                    }
                }
            }
            hi
        }
    };

    let avg_length_at_n = search.memo[&n_min];
    Ok(AlcResult {
        n_min,
        avg_length_at_n,
        evaluations: search.trace,
        config_echo: *cfg,
    })
}
