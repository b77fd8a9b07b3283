//! Conjugate multinomial/Dirichlet model of the net promoter score.
//!
//! Survey respondents fall into three categories (detractors, passives,
//! promoters) with population shares `(t1, t2, t3)`. The score of interest is
//! `delta = t3 - t1`. With a Dirichlet prior on the shares and multinomial
//! counts, the posterior is again Dirichlet with the counts added to the
//! concentration vector, so updating is exact and sequential batches compose
//! by addition. The posterior mean and variance of `delta` have closed forms
//! through the beta marginals of the Dirichlet.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detractor/passive/promoter tallies from one survey batch.
///
/// Serializes as a `[x1, x2, x3]` array.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "[u64; 3]", from = "[u64; 3]")]
pub struct Counts {
    pub detractors: u64,
    pub passives: u64,
    pub promoters: u64,
}

impl Counts {
    pub fn new(detractors: u64, passives: u64, promoters: u64) -> Self {
        Self {
            detractors,
            passives,
            promoters,
        }
    }

    /// Number of respondents in the batch.
    pub fn total(&self) -> u64 {
        self.detractors + self.passives + self.promoters
    }

    pub fn as_array(&self) -> [u64; 3] {
        [self.detractors, self.passives, self.promoters]
    }
}

impl From<Counts> for [u64; 3] {
    fn from(c: Counts) -> Self {
        c.as_array()
    }
}

impl From<[u64; 3]> for Counts {
    fn from(a: [u64; 3]) -> Self {
        Counts::new(a[0], a[1], a[2])
    }
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, other: Counts) -> Counts {
        Counts::new(
            self.detractors + other.detractors,
            self.passives + other.passives,
            self.promoters + other.promoters,
        )
    }
}

/// Positive concentration vector of a Dirichlet distribution.
///
/// Serves as prior, posterior, and persisted state alike. Parameters are
/// real-valued so arbitrary priors are expressible; construction validates
/// positivity. Serializes as a `[a1, a2, a3]` array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", try_from = "[f64; 3]")]
pub struct DirichletParams {
    a1: f64,
    a2: f64,
    a3: f64,
}

impl DirichletParams {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        let ok =
            a1 > 0.0 && a2 > 0.0 && a3 > 0.0 && a1.is_finite() && a2.is_finite() && a3.is_finite();
        if ok {
            Ok(Self { a1, a2, a3 })
        } else {
            Err(Error::InvalidConcentration(a1, a2, a3))
        }
    }

    /// The flat prior `(1, 1, 1)`: uniform over the simplex.
    pub fn uniform() -> Self {
        Self {
            a1: 1.0,
            a2: 1.0,
            a3: 1.0,
        }
    }

    /// Weight of the detractor category.
    pub fn a1(&self) -> f64 {
        self.a1
    }

    /// Weight of the passive category.
    pub fn a2(&self) -> f64 {
        self.a2
    }

    /// Weight of the promoter category.
    pub fn a3(&self) -> f64 {
        self.a3
    }

    /// Total concentration `a1 + a2 + a3`.
    pub fn a0(&self) -> f64 {
        self.a1 + self.a2 + self.a3
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a1, self.a2, self.a3]
    }
}

impl From<DirichletParams> for [f64; 3] {
    fn from(p: DirichletParams) -> Self {
        p.as_array()
    }
}

impl TryFrom<[f64; 3]> for DirichletParams {
    type Error = Error;

    fn try_from(a: [f64; 3]) -> Result<Self> {
        DirichletParams::new(a[0], a[1], a[2])
    }
}

/// Closed-form posterior summary of the score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NpsEstimate {
    pub mean: f64,
    pub variance: f64,
}

impl NpsEstimate {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// How a credible interval was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalMethod {
    /// Mean plus/minus a multiple of the posterior standard deviation.
    Moment,
    /// Shortest order-statistic window of a Monte Carlo sample.
    Hpd,
}

/// A posterior credible interval for the score.
///
/// `level_or_gamma` carries the sd multiplier for [`IntervalMethod::Moment`]
/// and the coverage level `1 - rho` for [`IntervalMethod::Hpd`]. `clipped` is
/// set when a moment interval overshot `[-1, 1]` and was trimmed back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleInterval {
    pub lower: f64,
    pub upper: f64,
    pub method: IntervalMethod,
    pub level_or_gamma: f64,
    pub clipped: bool,
}

impl CredibleInterval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Conjugate update: add observed counts to the concentration vector.
///
/// Associative across batches, so running totals and one-shot updates agree.
pub fn update_posterior(prior: &DirichletParams, data: &Counts) -> DirichletParams {
    DirichletParams::new(
        prior.a1() + data.detractors as f64,
        prior.a2() + data.passives as f64,
        prior.a3() + data.promoters as f64,
    )
    .expect("adding nonnegative counts keeps parameters positive")
}

/// Posterior mean of the score: `(a3 - a1) / a0`.
pub fn posterior_mean(p: &DirichletParams) -> f64 {
    (p.a3() - p.a1()) / p.a0()
}

/// Posterior variance of the score:
/// `(a1 a2 + a2 a3 + 4 a1 a3) / (a0^2 (a0 + 1))`.
pub fn posterior_variance(p: &DirichletParams) -> f64 {
    let a0 = p.a0();
    (p.a1() * p.a2() + p.a2() * p.a3() + 4.0 * p.a1() * p.a3()) / (a0 * a0 * (a0 + 1.0))
}

/// Mean and variance bundled.
pub fn posterior_estimate(p: &DirichletParams) -> NpsEstimate {
    NpsEstimate {
        mean: posterior_mean(p),
        variance: posterior_variance(p),
    }
}

/// Moment credible interval `mean +/- gamma * sd`, clipped to `[-1, 1]`.
///
/// The score is bounded, so overshooting endpoints are trimmed and the
/// clipping is reported on the returned interval.
pub fn moment_interval(p: &DirichletParams, gamma: f64) -> Result<CredibleInterval> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::InvalidGamma(gamma));
    }
    let est = posterior_estimate(p);
    let half = gamma * est.sd();
    let raw_lower = est.mean - half;
    let raw_upper = est.mean + half;
    let clipped = raw_lower < -1.0 || raw_upper > 1.0;
    Ok(CredibleInterval {
        lower: raw_lower.max(-1.0),
        upper: raw_upper.min(1.0),
        method: IntervalMethod::Moment,
        level_or_gamma: gamma,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a1: f64, a2: f64, a3: f64) -> DirichletParams {
        DirichletParams::new(a1, a2, a3).unwrap()
    }

    #[test]
    fn update_adds_counts_componentwise() {
        let posterior = update_posterior(&DirichletParams::uniform(), &Counts::new(136, 82, 188));
        assert_eq!(posterior.as_array(), [137.0, 83.0, 189.0]);
    }

    #[test]
    fn empty_batch_is_identity() {
        let prior = params(2.5, 5.0, 8.25);
        let posterior = update_posterior(&prior, &Counts::default());
        assert_eq!(posterior, prior);
    }

    #[test]
    fn sequential_batches_compose() {
        let q1 = update_posterior(&DirichletParams::uniform(), &Counts::new(136, 82, 188));
        let q2 = update_posterior(&q1, &Counts::new(136, 82, 188));
        assert_eq!(q2.as_array(), [273.0, 165.0, 377.0]);

        let combined = update_posterior(
            &DirichletParams::uniform(),
            &(Counts::new(136, 82, 188) + Counts::new(136, 82, 188)),
        );
        assert_eq!(q2, combined);
    }

    #[test]
    fn mean_matches_closed_form() {
        assert_eq!(posterior_mean(&params(137.0, 83.0, 189.0)), 52.0 / 409.0);
        assert_eq!(posterior_mean(&DirichletParams::uniform()), 0.0);
        assert_eq!(posterior_mean(&params(273.0, 165.0, 377.0)), 104.0 / 815.0);
    }

    #[test]
    fn variance_matches_closed_form() {
        assert!((posterior_variance(&DirichletParams::uniform()) - 1.0 / 6.0).abs() < 1e-15);

        // Independent route: sum of the beta-marginal variances minus twice
        // the covariance of the two shares.
        let p = params(137.0, 83.0, 189.0);
        let a0 = p.a0();
        let denom = a0 * a0 * (a0 + 1.0);
        let var_t1 = p.a1() * (a0 - p.a1()) / denom;
        let var_t3 = p.a3() * (a0 - p.a3()) / denom;
        let cov = -p.a1() * p.a3() / denom;
        let expected = var_t1 + var_t3 - 2.0 * cov;
        assert!((posterior_variance(&p) - expected).abs() < 1e-15);
        assert!((posterior_variance(&p) - 130_630.0 / 68_585_210.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_variance_closed_form() {
        for a in [0.5, 1.0, 5.0, 50.0, 5000.0] {
            let v = posterior_variance(&params(a, a, a));
            assert!((v - 2.0 / (3.0 * (3.0 * a + 1.0))).abs() < 1e-15, "a = {a}");
        }
    }

    #[test]
    fn symmetric_variance_vanishes_monotonically() {
        let grid = [1.0, 10.0, 100.0, 1e4, 1e6, 1e9];
        let vars: Vec<f64> = grid
            .iter()
            .map(|&a| posterior_variance(&params(a, a, a)))
            .collect();
        for w in vars.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(*vars.last().unwrap() < 1e-9);
    }

    #[test]
    fn antisymmetry_and_swap_invariance() {
        let p = params(2.0, 5.0, 8.0);
        let q = params(8.0, 5.0, 2.0);
        assert_eq!(posterior_mean(&p), -posterior_mean(&q));
        assert_eq!(posterior_variance(&p), posterior_variance(&q));
    }

    #[test]
    fn moment_interval_from_closed_forms() {
        let p = params(137.0, 83.0, 189.0);
        let iv = moment_interval(&p, 1.96).unwrap();
        let sd = posterior_variance(&p).sqrt();
        let mean = posterior_mean(&p);
        assert!((iv.lower - (mean - 1.96 * sd)).abs() < 1e-12);
        assert!((iv.upper - (mean + 1.96 * sd)).abs() < 1e-12);
        assert_eq!(iv.method, IntervalMethod::Moment);
        assert_eq!(iv.level_or_gamma, 1.96);
        assert!(!iv.clipped);
    }

    #[test]
    fn zero_gamma_degenerates_to_point() {
        let iv = moment_interval(&DirichletParams::uniform(), 0.0).unwrap();
        assert_eq!(iv.lower, 0.0);
        assert_eq!(iv.upper, 0.0);
        assert!(!iv.clipped);
    }

    #[test]
    fn wide_interval_clips_at_one() {
        // mean 9/12 = 0.75, three sds overshoot the upper bound
        let iv = moment_interval(&params(1.0, 1.0, 10.0), 3.0).unwrap();
        assert_eq!(iv.upper, 1.0);
        assert!(iv.lower > -1.0);
        assert!(iv.clipped);
    }

    #[test]
    fn negative_gamma_rejected() {
        assert!(matches!(
            moment_interval(&DirichletParams::uniform(), -1.0),
            Err(Error::InvalidGamma(_))
        ));
        assert!(matches!(
            moment_interval(&DirichletParams::uniform(), f64::NAN),
            Err(Error::InvalidGamma(_))
        ));
    }

    #[test]
    fn params_reject_nonpositive_components() {
        assert!(DirichletParams::new(0.0, 1.0, 1.0).is_err());
        assert!(DirichletParams::new(1.0, -2.0, 1.0).is_err());
        assert!(DirichletParams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(DirichletParams::new(1.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn counts_total_recovers_sample_size() {
        assert_eq!(Counts::new(136, 82, 188).total(), 406);
        assert_eq!(Counts::default().total(), 0);
    }
}
