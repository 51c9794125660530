//! Seeded, counter-based random streams and an order-fixed Monte Carlo reduction.
//!
//! Every random quantity is drawn from a ChaCha8 stream addressed by
//! `(seed, stream id)`, so a value depends only on its address and never on
//! which thread or in which order it was evaluated. Monte Carlo samples are
//! reduced in fixed-size chunks; chunks are merged in index order, which makes
//! the sequential driver here and any parallel driver built on [`run_chunk`]
//! and [`Moments::merge`] bit-identical.

#[allow(unused_imports)] // unused when num-traits links std
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Samples per reduction chunk.
pub const CHUNK: u64 = 1024;

/// Stream ids with this bit set are reserved for per-cycle permutations.
pub const PERMUTATION_BIT: u64 = 1 << 63;

/// The ChaCha8 stream `stream` of generator `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for the noise of one shutter setting.
pub fn setting_stream(cycle: usize, config_index: usize) -> u64 {
    (cycle as u64) * 8 + config_index as u64
}

/// Stream for the shutter order of one cycle.
pub fn permutation_stream(cycle: usize) -> u64 {
    PERMUTATION_BIT | cycle as u64
}

/// One standard-normal variate.
pub fn standard_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Outcome of one Monte Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSample {
    pub value: f64,
    /// Draws discarded before `value` was accepted.
    pub rejected: u64,
}

impl McSample {
    pub fn accepted(value: f64) -> Self {
        Self { value, rejected: 0 }
    }
}

/// A Monte Carlo estimator whose `index`-th sample is a pure function of `index`.
pub trait MonteCarloModel {
    fn sample(&self, index: u64) -> McSample;
}

impl<F: Fn(u64) -> McSample> MonteCarloModel for F {
    fn sample(&self, index: u64) -> McSample {
        self(index)
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
    pub rejected: u64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan's pairwise combination.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return Moments {
                rejected: self.rejected + other.rejected,
                ..*other
            };
        }
        if other.n == 0 {
            return Moments {
                rejected: self.rejected + other.rejected,
                ..*self
            };
        }
        let n = self.n + other.n;
        let (na, nb) = (self.n as f64, other.n as f64);
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * nb / n as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n as f64,
            rejected: self.rejected + other.rejected,
        }
    }

    /// Sample variance with `n − 1` normalization; zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn summary(&self) -> McSummary {
        let std = self.variance().sqrt();
        McSummary {
            n: self.n,
            mean: self.mean,
            std,
            std_error: if self.n > 0 {
                std / (self.n as f64).sqrt()
            } else {
                0.0
            },
            rejected: self.rejected,
        }
    }
}

/// Aggregate of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McSummary {
    pub n: u64,
    pub mean: f64,
    pub std: f64,
    /// Standard error of `mean`.
    pub std_error: f64,
    pub rejected: u64,
}

/// Number of chunks covering `n` samples.
pub fn chunk_count(n: u64) -> u64 {
    n.div_ceil(CHUNK)
}

/// Moments of the samples in chunk `chunk` of a run with `n` samples.
pub fn run_chunk<M: MonteCarloModel + ?Sized>(model: &M, chunk: u64, n: u64) -> Moments {
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(n);
    let mut m = Moments::default();
    for i in start..end {
        let s = model.sample(i);
        m.push(s.value);
        m.rejected += s.rejected;
    }
    m
}

/// Merges per-chunk moments in chunk order.
pub fn reduce_chunks<I: IntoIterator<Item = Moments>>(chunks: I) -> Moments {
    chunks
        .into_iter()
        .fold(Moments::default(), |acc, m| acc.merge(&m))
}

/// Runs `n` samples sequentially.
pub fn run<M: MonteCarloModel + ?Sized>(model: &M, n: u64) -> McSummary {
    reduce_chunks((0..chunk_count(n)).map(|c| run_chunk(model, c, n))).summary()
}
