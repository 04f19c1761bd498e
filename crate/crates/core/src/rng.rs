//! Portable deterministic pseudo-random generator.
//!
//! Everything that needs randomness (synthetic streams, permutation nulls,
//! randomized tests) uses this one splitmix64 generator so runs reproduce
//! bit-for-bit from an integer seed, and so the scheme can be re-implemented
//! in another language from the equations below.
//!
//! State update and output, all in wrapping 64-bit arithmetic:
//!
//! ```text
//! state ← state + 0x9E3779B97F4A7C15
//! z ← state
//! z ← (z ⊕ (z >> 30)) · 0xBF58476D1CE4E5B9
//! z ← (z ⊕ (z >> 27)) · 0x94D049BB133111EB
//! output ← z ⊕ (z >> 31)
//! ```
//!
//! Uniform doubles in `[0, 1)` take the top 53 bits: `(output >> 11) · 2⁻⁵³`.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..bound`. Bound must be non-zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    /// Derives an independent generator, e.g. one per tag or per round.
    pub fn fork(&mut self) -> SplitMix64 {
        SplitMix64::new(self.next_u64())
    }
}

/// In-place Fisher–Yates shuffle driven by the portable generator.
pub fn shuffle<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}
