//! Deterministic, seedable random-variate generation.
//!
//! Everything random in this crate flows through [`RngStream`], a value type
//! wrapping a PCG XSL RR 128/64 generator (`rand_pcg::Pcg64`). A stream is
//! identified by a `(seed, stream_id)` pair: the same pair always reproduces
//! the same variate sequence, and distinct stream ids select distinct PCG
//! stream increments, giving statistically independent sequences. Parallel
//! code never shares a stream; it derives children with
//! [`RngStream::substream`], a pure function of the ids, so results do not
//! depend on worker count or evaluation order.
//!
//! Samplers: gamma via the Marsaglia-Tsang squeeze rejection (shapes below
//! one handled by the boost `G(a) = G(a + 1) * U^(1/a)`), Dirichlet by
//! normalizing gamma draws, categorical by inversion, and multinomial by the
//! conditional-binomial decomposition so cost stays flat in `n`.

use rand::RngCore;
use rand_distr::{Binomial, Distribution};
use rand_pcg::Pcg64;

use crate::error::{Error, Result};
use crate::model::{Counts, DirichletParams};

/// Absolute tolerance on the simplex constraint `t1 + t2 + t3 = 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// SplitMix64 step, used to expand 64-bit ids into PCG state and to mix
/// substream keys.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn expand_u128(id: u64) -> u128 {
    let mut s = id;
    let hi = splitmix64(&mut s);
    let lo = splitmix64(&mut s);
    ((hi as u128) << 64) | lo as u128
}

fn mix_key(stream_id: u64, key: u64) -> u64 {
    let mut s = key ^ 0xA076_1D64_78BD_642F;
    let hashed_key = splitmix64(&mut s);
    let mut t = stream_id ^ hashed_key;
    splitmix64(&mut t)
}

/// A seeded, forkable random stream.
///
/// Owned by exactly one worker at a time; fork independent child streams
/// with [`substream`](Self::substream) instead of sharing.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: Pcg64,
}

impl RngStream {
    /// Root stream for a seed (stream id 0).
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let state = expand_u128(seed);
        let stream = expand_u128(stream_id ^ 0x5851_F42D_4C95_7F2D);
        Self {
            seed,
            stream_id,
            rng: Pcg64::new(state, stream),
        }
    }

    /// Derive an independent child stream.
    ///
    /// Pure in `(seed, stream_id, key)`: the derivation neither consumes nor
    /// depends on this stream's position, so the same key always yields the
    /// same child. Chain calls to key by tuples, e.g.
    /// `root.substream(rep).substream(n)`.
    pub fn substream(&self, key: u64) -> Self {
        Self::with_stream(self.seed, mix_key(self.stream_id, key))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on `(0, 1]`; safe under `ln` and fractional powers.
    #[inline]
    fn next_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// A point on the open probability simplex: three positive shares summing
/// to one within [`SIMPLEX_TOLERANCE`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportions {
    t1: f64,
    t2: f64,
    t3: f64,
}

impl Proportions {
    pub fn new(t1: f64, t2: f64, t3: f64) -> Result<Self> {
        let ok = t1 > 0.0
            && t2 > 0.0
            && t3 > 0.0
            && t1.is_finite()
            && t2.is_finite()
            && t3.is_finite()
            && (t1 + t2 + t3 - 1.0).abs() <= SIMPLEX_TOLERANCE;
        if ok {
            Ok(Self { t1, t2, t3 })
        } else {
            Err(Error::InvalidProportions(t1, t2, t3))
        }
    }

    /// Population share of detractors.
    pub fn detractors(&self) -> f64 {
        self.t1
    }

    /// Population share of passives.
    pub fn passives(&self) -> f64 {
        self.t2
    }

    /// Population share of promoters.
    pub fn promoters(&self) -> f64 {
        self.t3
    }

    /// Net promoter score of this simplex point: promoters minus detractors.
    pub fn nps(&self) -> f64 {
        self.t3 - self.t1
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.t1, self.t2, self.t3]
    }
}

/// One standard normal draw via the Marsaglia polar method.
fn normal_draw(stream: &mut RngStream) -> f64 {
    loop {
        let u = 2.0 * stream.next_f64() - 1.0;
        let v = 2.0 * stream.next_f64() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Marsaglia-Tsang rejection sampler; requires `shape >= 1`.
fn gamma_core(stream: &mut RngStream, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = normal_draw(stream);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = stream.next_open01();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// One draw from Gamma(shape, scale = 1).
pub fn gamma_draw(stream: &mut RngStream, shape: f64) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::InvalidShape(shape));
    }
    if shape < 1.0 {
        let g = gamma_core(stream, shape + 1.0);
        let u = stream.next_open01();
        Ok(g * u.powf(1.0 / shape))
    } else {
        Ok(gamma_core(stream, shape))
    }
}

/// One draw from the Dirichlet distribution with the given parameters.
///
/// Normalizes three gamma draws; the marginals are the usual beta laws.
pub fn dirichlet_draw(stream: &mut RngStream, p: &DirichletParams) -> Proportions {
    loop {
        let g1 = gamma_draw(stream, p.a1()).expect("validated shape");
        let g2 = gamma_draw(stream, p.a2()).expect("validated shape");
        let g3 = gamma_draw(stream, p.a3()).expect("validated shape");
        let total = g1 + g2 + g3;
        let (t1, t2, t3) = (g1 / total, g2 / total, g3 / total);
        // Redraw on underflow to zero so the shares stay strictly inside the
        // simplex; for realistic parameters this never triggers.
        if t1 > 0.0 && t2 > 0.0 && t3 > 0.0 && total.is_finite() {
            return Proportions { t1, t2, t3 };
        }
    }
}

/// Index in `{0, 1, 2}` drawn with the given simplex probabilities.
pub fn categorical_draw(stream: &mut RngStream, theta: &Proportions) -> usize {
    let u = stream.next_f64();
    if u < theta.t1 {
        0
    } else if u < theta.t1 + theta.t2 {
        1
    } else {
        2
    }
}

fn binomial_draw(stream: &mut RngStream, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("p lies in (0, 1)")
        .sample(stream)
}

/// Counts from Mult(n, theta) via the conditional-binomial decomposition:
/// `x1 ~ Bin(n, t1)`, then `x2 ~ Bin(n - x1, t2 / (t2 + t3))`, remainder to
/// `x3`. Per-draw cost is independent of `n`, which keeps the sample-size
/// search usable at tens of thousands of respondents.
pub fn multinomial_draw(stream: &mut RngStream, n: u64, theta: &Proportions) -> Counts {
    let x1 = binomial_draw(stream, n, theta.t1);
    let rest = theta.t2 + theta.t3;
    let p2 = if rest > 0.0 {
        (theta.t2 / rest).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let x2 = binomial_draw(stream, n - x1, p2);
    Counts::new(x1, x2, n - x1 - x2)
}
