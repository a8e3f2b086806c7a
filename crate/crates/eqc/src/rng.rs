//! Counter-based random number streams.
//!
//! Every random draw in this crate is keyed by a `(seed, index)` pair, so a
//! trace or a trial can be regenerated in isolation and Monte Carlo loops can
//! be parallelized without the results depending on scheduling order.

/// splitmix64 state update; the standard finalizer from Vigna's reference code.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with stream tags into an independent 64-bit substream key.
#[inline]
pub fn mix(seed: u64, tags: &[u64]) -> u64 {
    let mut state = seed;
    let mut out = splitmix64(&mut state);
    for &t in tags {
        state ^= t.wrapping_mul(0x2545_f491_4f6c_dd1d);
        out = splitmix64(&mut state);
    }
    out
}

/// A small deterministic generator seeded from a `(seed, tags...)` key.
///
/// Not cryptographic; statistical quality is that of splitmix64, which is
/// ample for the Monte Carlo work here.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(seed: u64, tags: &[u64]) -> Self {
        Stream {
            state: mix(seed, tags),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        // 53 random bits; offset by half an ulp so 0.0 is never returned.
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential variate with the given rate.
    #[inline]
    pub fn exp(&mut self, rate: f64) -> f64 {
        -self.next_f64().ln() / rate
    }

    /// Bernoulli draw with success probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform index in `0..n`.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }
}
