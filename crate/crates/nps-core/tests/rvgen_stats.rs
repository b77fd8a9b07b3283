//! Statistical checks of the samplers against independent oracles:
//! closed-form moments, a Kolmogorov-Smirnov test against a separately
//! implemented gamma CDF, and exact-pmf chi-square tests.

use nps_core::{
    dirichlet_draw, gamma_draw, multinomial_draw, DirichletParams, Proportions, RngStream,
};

// ---------------------------------------------------------------------------
// Oracle: regularized lower incomplete gamma P(a, x), independent of the
// sampler implementation. Series expansion below a + 1, continued fraction
// above (both standard), with a Lanczos log-gamma.
// ---------------------------------------------------------------------------

fn ln_gamma(z: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    assert!(z > 0.0);
    if z < 0.5 {
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * z).sin().ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        // Series for P(a, x).
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut k = a;
        loop {
            k += 1.0;
            term *= x / k;
            sum += term;
            if term.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        sum * log_prefactor.exp()
    } else {
        // Modified Lentz continued fraction for Q(a, x).
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=500 {
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
            if (delta - 1.0).abs() < 1e-15 {
                break;
            }
        }
        1.0 - log_prefactor.exp() * h
    }
}

fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Standard error of the sample variance, from the empirical fourth moment.
fn se_of_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mean, var) = mean_and_variance(xs);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    ((m4 - var * var) / n).max(0.0).sqrt()
}

fn gamma_sample(seed: u64, shape: f64, n: usize) -> Vec<f64> {
    let mut stream = RngStream::new(seed);
    (0..n)
        .map(|_| gamma_draw(&mut stream, shape).unwrap())
        .collect()
}

// ---------------------------------------------------------------------------
// Gamma sampler
// ---------------------------------------------------------------------------

#[test]
fn gamma_shape_one_mean_is_one() {
    let xs = gamma_sample(101, 1.0, 100_000);
    let (mean, _) = mean_and_variance(&xs);
    assert!((mean - 1.0).abs() <= 0.02, "mean {mean}");
}

#[test]
fn gamma_shape_five_moments() {
    let xs = gamma_sample(102, 5.0, 100_000);
    let (mean, var) = mean_and_variance(&xs);
    let se_mean = (var / xs.len() as f64).sqrt();
    assert!((mean - 5.0).abs() <= 3.0 * se_mean, "mean {mean}");
    assert!((var - 5.0).abs() <= 3.0 * se_of_variance(&xs), "var {var}");
}

#[test]
fn gamma_small_shape_passes_ks_at_one_percent() {
    let shape = 0.5;
    let n = 100_000;
    let mut xs = gamma_sample(103, shape, n);
    xs.sort_unstable_by(f64::total_cmp);
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = gamma_p(shape, x);
        let hi = (i as f64 + 1.0) / n as f64 - f;
        let lo = f - i as f64 / n as f64;
        d = d.max(hi).max(lo);
    }
    // Asymptotic 1% critical value of the Kolmogorov statistic.
    let critical = 1.628 / (n as f64).sqrt();
    assert!(d <= critical, "KS statistic {d} exceeds {critical}");
}

#[test]
fn gamma_cdf_oracle_sanity() {
    // Exponential special case: P(1, x) = 1 - exp(-x).
    for x in [0.1, 0.5, 1.0, 3.0, 10.0] {
        assert!((gamma_p(1.0, x) - (1.0 - (-x).exp())).abs() < 1e-12);
    }
    // Median of Gamma(0.5) = qchisq(0.5, 1) / 2.
    assert!((gamma_p(0.5, 0.454936423119572 / 2.0) - 0.5).abs() < 1e-9);
}

// ---------------------------------------------------------------------------
// Dirichlet sampler
// ---------------------------------------------------------------------------

#[test]
fn dirichlet_flat_prior_has_uniform_means() {
    let p = DirichletParams::uniform();
    let mut stream = RngStream::new(104);
    let n = 100_000;
    let mut sums = [0.0f64; 3];
    for _ in 0..n {
        let t = dirichlet_draw(&mut stream, &p);
        for (s, v) in sums.iter_mut().zip(t.as_array()) {
            *s += v;
        }
    }
    // Var of each component is (1/3)(2/3)/4 = 1/18.
    let se = (1.0 / 18.0f64 / n as f64).sqrt();
    for s in sums {
        assert!((s / n as f64 - 1.0 / 3.0).abs() <= 3.0 * se);
    }
}

#[test]
fn dirichlet_skewed_prior_matches_mean_formula() {
    let p = DirichletParams::new(2.0, 5.0, 8.0).unwrap();
    let mut stream = RngStream::new(105);
    let n = 100_000;
    let mut sums = [0.0f64; 3];
    for _ in 0..n {
        let t = dirichlet_draw(&mut stream, &p);
        for (s, v) in sums.iter_mut().zip(t.as_array()) {
            *s += v;
        }
    }
    for (i, want) in [2.0 / 15.0, 5.0 / 15.0, 8.0 / 15.0].into_iter().enumerate() {
        let got = sums[i] / n as f64;
        let se = (want * (1.0 - want) / 16.0 / n as f64).sqrt();
        assert!(
            (got - want).abs() <= 3.0 * se,
            "component {i}: {got} vs {want}"
        );
    }
}

#[test]
fn dirichlet_component_variance_matches_formula() {
    let p = DirichletParams::new(5.0, 5.0, 5.0).unwrap();
    let mut stream = RngStream::new(106);
    let n = 100_000;
    let first: Vec<f64> = (0..n)
        .map(|_| dirichlet_draw(&mut stream, &p).detractors())
        .collect();
    let (_, var) = mean_and_variance(&first);
    let want = 1.0 / 72.0;
    assert!(
        (var - want).abs() <= 4.0 * se_of_variance(&first),
        "var {var} vs {want}"
    );
}

// ---------------------------------------------------------------------------
// Multinomial sampler
// ---------------------------------------------------------------------------

#[test]
fn multinomial_uniform_thirds_mean_counts() {
    let theta = Proportions::new(1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0).unwrap();
    let mut stream = RngStream::new(107);
    let reps = 10_000;
    let n = 1000u64;
    let mut sums = [0.0f64; 3];
    for _ in 0..reps {
        let c = multinomial_draw(&mut stream, n, &theta);
        for (s, v) in sums.iter_mut().zip(c.as_array()) {
            *s += v as f64;
        }
    }
    let want = n as f64 / 3.0;
    let se = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0) / reps as f64).sqrt();
    for s in sums {
        let got = s / reps as f64;
        assert!((got - want).abs() <= 3.0 * se, "{got} vs {want}");
    }
}

#[test]
fn multinomial_matches_exact_pmf_chi_square() {
    // Exhaustive goodness of fit at n = 5 against the exact multinomial pmf.
    let n = 5u64;
    let (t1, t2, t3) = (0.2, 0.3, 0.5);
    let theta = Proportions::new(t1, t2, t3).unwrap();

    let factorial = |k: u64| -> f64 { (1..=k).map(|v| v as f64).product() };
    let pmf = |x1: u64, x2: u64, x3: u64| -> f64 {
        factorial(n) / (factorial(x1) * factorial(x2) * factorial(x3))
            * t1.powi(x1 as i32)
            * t2.powi(x2 as i32)
            * t3.powi(x3 as i32)
    };

    let reps = 100_000usize;
    let mut observed = std::collections::HashMap::new();
    let mut stream = RngStream::new(108);
    for _ in 0..reps {
        let c = multinomial_draw(&mut stream, n, &theta);
        *observed.entry(c.as_array()).or_insert(0u64) += 1;
    }

    let mut chi2 = 0.0;
    let mut cells = 0;
    let mut total_p = 0.0;
    for x1 in 0..=n {
        for x2 in 0..=(n - x1) {
            let x3 = n - x1 - x2;
            let p = pmf(x1, x2, x3);
            total_p += p;
            let expected = p * reps as f64;
            let got = *observed.get(&[x1, x2, x3]).unwrap_or(&0) as f64;
            chi2 += (got - expected) * (got - expected) / expected;
            cells += 1;
        }
    }
    assert_eq!(cells, 21);
    assert!((total_p - 1.0).abs() < 1e-12);
    // chi-square critical value, 20 degrees of freedom, 1% level
    assert!(chi2 <= 37.566, "chi2 = {chi2}");
}

#[test]
fn multinomial_marginals_have_binomial_variance() {
    let theta = Proportions::new(0.2, 0.3, 0.5).unwrap();
    let mut stream = RngStream::new(109);
    let reps = 10_000;
    let n = 100u64;
    let mut columns: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for _ in 0..reps {
        let c = multinomial_draw(&mut stream, n, &theta);
        for (col, v) in columns.iter_mut().zip(c.as_array()) {
            col.push(v as f64);
        }
    }
    for (col, p) in columns.iter().zip([0.2, 0.3, 0.5]) {
        let (_, var) = mean_and_variance(col);
        let want = n as f64 * p * (1.0 - p);
        assert!(
            (var - want).abs() <= 4.0 * se_of_variance(col),
            "{var} vs {want}"
        );
    }
}

// ---------------------------------------------------------------------------
// Reproducibility
// ---------------------------------------------------------------------------

#[test]
fn identical_streams_give_bit_identical_variates() {
    let p = DirichletParams::new(137.0, 83.0, 189.0).unwrap();
    let run = || {
        let mut stream = RngStream::with_stream(77, 5);
        let mut out = Vec::new();
        for _ in 0..50 {
            out.push(gamma_draw(&mut stream, 2.5).unwrap());
            out.push(dirichlet_draw(&mut stream, &p).nps());
            out.push(
                multinomial_draw(&mut stream, 1000, &Proportions::new(0.2, 0.3, 0.5).unwrap())
                    .detractors as f64,
            );
        }
        out
    };
    assert_eq!(run(), run());
}
