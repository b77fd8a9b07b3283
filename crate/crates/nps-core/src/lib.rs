//! Bayesian estimation of the Net Promoter Score.
//!
//! Survey counts of detractors, passives, and promoters feed a conjugate
//! multinomial/Dirichlet model; the score `delta = t3 - t1` then has
//! closed-form posterior moments, Monte Carlo credible intervals, and a
//! preposterior sample-size search based on the average HPD length.
//!
//! - [`model`]: posterior updating and closed-form summaries.
//! - [`rvgen`]: seeded gamma/Dirichlet/categorical/multinomial samplers.
//! - [`hpd`]: posterior sampling of the score and HPD intervals.
//! - [`alc`]: average-length-criterion minimum sample size.
//! - [`ingest`]: CSV score ingestion and posterior-state persistence.
//!
//! All randomness is reproducible: every entry point takes either a seed or
//! an [`RngStream`], and results are independent of worker count.

pub mod alc;
pub mod error;
pub mod hpd;
pub mod ingest;
pub mod model;
pub mod rvgen;

pub use alc::{
    average_hpd_length, hpd_length_replicates, min_sample_size, predictive_draw, AlcConfig,
    AlcResult, Evaluation, SearchStrategy, DEFAULT_MAX_N, DEFAULT_POSTERIOR_DRAWS,
    DEFAULT_REPLICATIONS, DEFAULT_SEED,
};
pub use error::{Error, Result};
pub use hpd::{equal_tailed_bounds, hpd_interval, hpd_length, sample_delta, NpsSample};
pub use ingest::{
    categorize_score, load_state, read_scores_csv, save_state, tally_scores, Category,
    HistoryEntry, PosteriorState, SurveyRecord, STATE_FORMAT_VERSION,
};
pub use model::{
    moment_interval, posterior_estimate, posterior_mean, posterior_variance, update_posterior,
    Counts, CredibleInterval, DirichletParams, IntervalMethod, NpsEstimate,
};
pub use rvgen::{
    categorical_draw, dirichlet_draw, gamma_draw, multinomial_draw, Proportions, RngStream,
    SIMPLEX_TOLERANCE,
};
