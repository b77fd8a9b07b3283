//! `nps`: Bayesian Net Promoter Score estimation from the command line.
//!
//! Subcommands: `estimate` (point and interval estimates from counts or a
//! CSV of scores, with optional sequential state), `samplesize` (minimum
//! sample size under the average length criterion), and `tables` (grids of
//! minimum sample sizes). Everything is seeded and reproducible; output
//! never depends on `--threads`.

mod report;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nps_core::{
    hpd_interval, load_state, min_sample_size, moment_interval, posterior_estimate,
    read_scores_csv, sample_delta, save_state, tally_scores, AlcConfig, Counts, DirichletParams,
    Error, PosteriorState, RngStream, SearchStrategy, DEFAULT_MAX_N, DEFAULT_POSTERIOR_DRAWS,
    DEFAULT_REPLICATIONS, DEFAULT_SEED,
};
use report::CliReport;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NO_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "nps",
    version,
    about = "Bayesian Net Promoter Score estimation and sample-size planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the score from survey counts or a CSV of 0-10 ratings
    Estimate(EstimateArgs),
    /// Find the smallest survey meeting an average HPD length target
    Samplesize(SamplesizeArgs),
    /// Tabulate minimum sample sizes over a grid of targets
    Tables(TablesArgs),
}

fn parse_counts(s: &str) -> Result<Counts, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated counts, e.g. 136,82,188".into());
    }
    let mut values = [0u64; 3];
    for (v, p) in values.iter_mut().zip(&parts) {
        *v = p
            .parse()
            .map_err(|_| format!("`{p}` is not a nonnegative integer"))?;
    }
    Ok(Counts::new(values[0], values[1], values[2]))
}

fn parse_prior(s: &str) -> Result<DirichletParams, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated parameters, e.g. 1,1,1".into());
    }
    let mut values = [0f64; 3];
    for (v, p) in values.iter_mut().zip(&parts) {
        *v = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    DirichletParams::new(values[0], values[1], values[2]).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Linear,
    Bisect,
}

impl From<StrategyArg> for SearchStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Linear => SearchStrategy::LinearScan,
            StrategyArg::Bisect => SearchStrategy::BracketBisect,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Detractor,passive,promoter counts, e.g. 136,82,188
    #[arg(long, value_parser = parse_counts, conflicts_with = "scores", required_unless_present = "scores")]
    counts: Option<Counts>,

    /// CSV file with a `score` column of 0-10 ratings
    #[arg(long)]
    scores: Option<PathBuf>,

    /// Prior concentration a1,a2,a3 (default 1,1,1; not allowed when an
    /// existing --state file already carries the posterior)
    #[arg(long, value_parser = parse_prior)]
    prior: Option<DirichletParams>,

    /// One minus the HPD coverage level
    #[arg(long, default_value_t = 0.05)]
    rho: f64,

    /// Standard-deviation multiplier for the moment interval
    #[arg(long, default_value_t = 1.96)]
    gamma: f64,

    /// Posterior draws behind the HPD interval and MC mean
    #[arg(long, default_value_t = 10_000)]
    draws: usize,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// JSON state file for sequential updating across survey waves
    #[arg(long)]
    state: Option<PathBuf>,

    /// Label recorded with this batch in the state history
    #[arg(long)]
    label: Option<String>,

    /// Emit the report as JSON instead of text
    #[arg(long)]
    json: bool,

    /// Cap worker threads (results never depend on this)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SamplesizeArgs {
    /// Maximum admissible average HPD length, in (0, 2]
    #[arg(long)]
    lmax: f64,

    /// One minus the HPD coverage level
    #[arg(long, default_value_t = 0.05)]
    rho: f64,

    /// Prior concentration a1,a2,a3
    #[arg(long, value_parser = parse_prior, default_value = "1,1,1")]
    prior: DirichletParams,

    /// Predictive replications per candidate sample size
    #[arg(long = "L", default_value_t = DEFAULT_REPLICATIONS)]
    replications: usize,

    /// Posterior draws per replication
    #[arg(long = "N", default_value_t = DEFAULT_POSTERIOR_DRAWS)]
    posterior_draws: usize,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = StrategyArg::Bisect)]
    strategy: StrategyArg,

    /// Give up past this sample size
    #[arg(long = "max-n", default_value_t = DEFAULT_MAX_N)]
    max_n: u64,

    /// Emit the result (including the evaluation trace) as JSON
    #[arg(long)]
    json: bool,

    /// Cap worker threads (results never depend on this)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Md,
    Csv,
}

#[derive(Args)]
struct TablesArgs {
    /// Prior concentration a1,a2,a3
    #[arg(long, value_parser = parse_prior, default_value = "1,1,1")]
    prior: DirichletParams,

    /// Comma-separated l_max grid (default 0.02 through 0.20, step 0.02)
    #[arg(long = "lmax-grid", value_delimiter = ',', num_args = 1..)]
    lmax_grid: Option<Vec<f64>>,

    /// Comma-separated rho grid
    #[arg(long = "rho-grid", value_delimiter = ',', num_args = 1.., default_values_t = [0.01, 0.05, 0.10])]
    rho_grid: Vec<f64>,

    /// Keep only the cheap cells (l_max >= 0.10)
    #[arg(long)]
    cheap: bool,

    /// Run the four standard prior scenarios over the full grid
    /// (expensive: the l_max = 0.02 column needs tens of thousands of
    /// respondents per cell)
    #[arg(long = "full-tables", conflicts_with_all = ["prior", "cheap", "lmax_grid", "rho_grid"])]
    full_tables: bool,

    #[arg(long = "L", default_value_t = DEFAULT_REPLICATIONS)]
    replications: usize,

    #[arg(long = "N", default_value_t = DEFAULT_POSTERIOR_DRAWS)]
    posterior_draws: usize,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = StrategyArg::Bisect)]
    strategy: StrategyArg,

    #[arg(long = "max-n", default_value_t = DEFAULT_MAX_N)]
    max_n: u64,

    #[arg(long, value_enum, default_value_t = TableFormat::Md)]
    format: TableFormat,

    /// Cap worker threads (results never depend on this)
    #[arg(long)]
    threads: Option<usize>,
}

/// A failure plus the exit code it maps to.
struct CliFailure {
    code: u8,
    message: String,
}

impl CliFailure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliFailure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NonConvergence { .. } => EXIT_NO_CONVERGENCE,
            Error::InvalidConcentration(..)
            | Error::InvalidShape(_)
            | Error::InvalidProportions(..)
            | Error::InvalidRho(_)
            | Error::InvalidGamma(_)
            | Error::SampleTooSmall { .. }
            | Error::InvalidSample
            | Error::EmptySample
            | Error::ZeroSampleSize
            | Error::InvalidConfig(_) => EXIT_USAGE,
            Error::ScoreOutOfRange(_)
            | Error::MalformedScore { .. }
            | Error::MissingColumn(_)
            | Error::AtRow { .. }
            | Error::StateInvariant(_)
            | Error::StateVersion { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliFailure> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliFailure::usage(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliFailure> {
    let start = Instant::now();

    if args.draws == 0 {
        return Err(CliFailure::usage("--draws must be at least 1"));
    }
    let counts = match (&args.counts, &args.scores) {
        (Some(c), None) => *c,
        (None, Some(path)) => {
            let records = read_scores_csv(path)?;
            tally_scores(&records)?
        }
        _ => unreachable!("clap enforces exactly one input source"),
    };

    let mut state = match &args.state {
        Some(path) if path.exists() => {
            if args.prior.is_some() {
                return Err(CliFailure::usage(
                    "--prior conflicts with an existing --state file: the stored \
                     posterior is the prior for this batch",
                ));
            }
            load_state(path)?
        }
        _ => PosteriorState::new(args.prior.unwrap_or_else(DirichletParams::uniform)),
    };

    let label = args
        .label
        .clone()
        .unwrap_or_else(|| format!("batch-{}", state.history.len() + 1));
    state.apply(label, counts);
    let posterior = state.params;

    let estimate = posterior_estimate(&posterior);
    let moment = moment_interval(&posterior, args.gamma)?;
    let (sample, hpd) = with_threads(args.threads, || {
        let mut stream = RngStream::new(args.seed);
        let sample = sample_delta(&mut stream, &posterior, args.draws);
        let hpd = hpd_interval(&sample, args.rho);
        (sample, hpd)
    })?;
    let hpd = hpd?;

    // Persist only after every estimate succeeded; a failed run must not
    // advance the stored posterior.
    if let Some(path) = &args.state {
        save_state(&state, path)?;
    }

    let report = CliReport {
        point_estimate: estimate.mean,
        mc_point_estimate: sample.mean(),
        moment_interval: moment,
        hpd,
        posterior,
        seed: args.seed,
        draws: sample.len(),
        runtime_ms: start.elapsed().as_millis() as u64,
    };

    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        println!("{}", report.render_human());
    }
    Ok(())
}

fn cmd_samplesize(args: SamplesizeArgs) -> Result<(), CliFailure> {
    let start = Instant::now();
    let cfg = AlcConfig {
        l_max: args.lmax,
        rho: args.rho,
        replications: args.replications,
        posterior_draws: args.posterior_draws,
        seed: args.seed,
        strategy: args.strategy.into(),
        max_n: args.max_n,
    };
    let prior = args.prior;
    let result = with_threads(args.threads, || min_sample_size(&prior, &cfg))??;

    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&result).expect("result serializes")
        );
    } else {
        println!("minimum sample size        {}", result.n_min);
        println!(
            "average HPD length there   {:.6} (target l_max = {}, coverage {}%)",
            result.avg_length_at_n,
            cfg.l_max,
            100.0 * (1.0 - cfg.rho)
        );
        println!(
            "evaluations ({} candidate sizes, runtime {} ms):",
            result.evaluations.len(),
            start.elapsed().as_millis()
        );
        for e in &result.evaluations {
            println!("  n = {:<8} avg length = {:.6}", e.n, e.avg_length);
        }
    }
    Ok(())
}

fn cmd_tables(args: TablesArgs) -> Result<(), CliFailure> {
    let default_lmax: Vec<f64> = (1..=10).map(|i| i as f64 * 0.02).collect();

    let (priors, lmax_values, rho_values) = if args.full_tables {
        let scenarios = [
            DirichletParams::uniform(),
            DirichletParams::new(5.0, 5.0, 5.0).expect("valid"),
            DirichletParams::new(2.0, 5.0, 8.0).expect("valid"),
            DirichletParams::new(8.0, 5.0, 2.0).expect("valid"),
        ];
        (scenarios.to_vec(), default_lmax, vec![0.01, 0.05, 0.10])
    } else {
        let mut lmax = args.lmax_grid.clone().unwrap_or(default_lmax);
        if args.cheap {
            lmax.retain(|&l| l >= 0.10);
        }
        if lmax.is_empty() {
            return Err(CliFailure::usage("the l_max grid is empty"));
        }
        if args.rho_grid.is_empty() {
            return Err(CliFailure::usage("the rho grid is empty"));
        }
        (vec![args.prior], lmax, args.rho_grid.clone())
    };

    let base = AlcConfig {
        l_max: lmax_values[0],
        rho: rho_values[0],
        replications: args.replications,
        posterior_draws: args.posterior_draws,
        seed: args.seed,
        strategy: args.strategy.into(),
        max_n: args.max_n,
    };

    let mut rendered = Vec::new();
    for prior in &priors {
        let grid = with_threads(args.threads, || {
            tables::run_grid(prior, &lmax_values, &rho_values, &base)
        })??;
        rendered.push(match args.format {
            TableFormat::Md => tables::render_markdown(&grid),
            TableFormat::Csv => tables::render_csv(&grid),
        });
    }
    // Each grid already ends with a newline; joining adds a blank separator.
    print!("{}", rendered.join("\n"));
    Ok(())
}

/// Die quietly when a downstream pipe closes, like other line-oriented
/// tools, instead of panicking mid-print.
fn reset_sigpipe() {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Samplesize(args) => cmd_samplesize(args),
        Command::Tables(args) => cmd_tables(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
