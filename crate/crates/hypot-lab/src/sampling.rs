//! Seeded, deterministic generation of the experiment input distributions.
//!
//! Pair `i` is a pure function of (seed, i): each pair draws from its own
//! ChaCha substream, so a stream split into shards produces exactly the
//! pairs of the unsplit stream regardless of shard count, even for the
//! rejection-sampled normal distribution.

use std::marker::PhantomData;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::fp::BinaryFloat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    /// Both coordinates standard normal.
    NormalPair,
    /// `a` uniform over [2^n, 2^(n+1)), `b` uniform over [1, 2): significands
    /// uniformly distributed, exponents differing by `gap_n`.
    ExponentGap { gap_n: u32 },
}

/// A deterministic pair stream: distribution, seed, index window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub seed: u64,
    pub count: u64,
    /// Index of the first pair (nonzero only for shard sub-streams).
    pub start: u64,
}

impl SamplerSpec {
    pub fn normal(seed: u64, count: u64) -> Self {
        SamplerSpec {
            kind: SamplerKind::NormalPair,
            seed,
            count,
            start: 0,
        }
    }

    pub fn exponent_gap(gap_n: u32, seed: u64, count: u64) -> Self {
        SamplerSpec {
            kind: SamplerKind::ExponentGap { gap_n },
            seed,
            count,
            start: 0,
        }
    }

    /// Exactly `count` pairs drawn from positions [start, start+count).
    pub fn generate<T: BinaryFloat>(&self) -> PairStream<T> {
        PairStream {
            rng: ChaCha12Rng::seed_from_u64(self.seed),
            next: self.start,
            end: self.start + self.count,
            kind: self.kind,
            _marker: PhantomData,
        }
    }

    /// Split into `shards` disjoint sub-streams whose union is this stream.
    pub fn split(&self, shards: usize) -> Vec<SamplerSpec> {
        assert!(shards >= 1);
        let shards = shards as u64;
        let base = self.count / shards;
        let extra = self.count % shards;
        let mut out = Vec::with_capacity(shards as usize);
        let mut start = self.start;
        for i in 0..shards {
            let count = base + u64::from(i < extra);
            out.push(SamplerSpec {
                kind: self.kind,
                seed: self.seed,
                count,
                start,
            });
            start += count;
        }
        out
    }
}

pub struct PairStream<T> {
    rng: ChaCha12Rng,
    next: u64,
    end: u64,
    kind: SamplerKind,
    _marker: PhantomData<T>,
}

impl<T: BinaryFloat> Iterator for PairStream<T> {
    type Item = (T, T);

    fn next(&mut self) -> Option<(T, T)> {
        if self.next == self.end {
            return None;
        }
        // one private substream per pair index
        self.rng.set_stream(self.next);
        self.rng.set_word_pos(0);
        self.next += 1;
        Some(match self.kind {
            SamplerKind::NormalPair => polar_pair(&mut self.rng),
            SamplerKind::ExponentGap { gap_n } => {
                let a = uniform_binade::<T>(self.rng.next_u64(), gap_n as i64);
                let b = uniform_binade::<T>(self.rng.next_u64(), 0);
                (a, b)
            }
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

/// Marsaglia's polar method: uniform points in the unit disk map to pairs of
/// independent standard normals as (u*w, v*w) with w a function of u^2+v^2
/// alone. The resulting hypotenuse w*sqrt(s) lands generically between
/// representable values, which matters here: the trigonometric variant would
/// pin every pair's true hypotenuse to an already-representable float and
/// bias exactly the rounding statistics this crate measures.
fn polar_pair<T: BinaryFloat>(r: &mut impl RngCore) -> (T, T) {
    loop {
        let u = (r.next_u64() >> 11) as f64 * 2f64.powi(-52) - 1.0; // [-1, 1)
        let v = (r.next_u64() >> 11) as f64 * 2f64.powi(-52) - 1.0;
        let s = u * u + v * v;
        if s >= 1.0 || s == 0.0 {
            continue;
        }
        let w = (-2.0 * s.ln() / s).sqrt();
        return (T::from_f64(u * w), T::from_f64(v * w));
    }
}

/// Uniform over [2^n, 2^(n+1)): fixed exponent, uniform significand bits.
fn uniform_binade<T: BinaryFloat>(r: u64, n: i64) -> T {
    let frac_bits = T::PRECISION_BITS - 1;
    let frac = r >> (64 - frac_bits);
    T::from_parts((1u64 << frac_bits) | frac, n - frac_bits as i64)
}
