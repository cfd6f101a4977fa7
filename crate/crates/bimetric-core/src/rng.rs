//! Deterministic 64-bit-state generator used by every randomized subroutine.
//!
//! The algorithm is SplitMix64: the state advances by the additive constant
//! 0x9E3779B97F4A7C15 and each output is the finalizer
//!
//! ```text
//! z = state;
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//! z ^ (z >> 31)
//! ```
//!
//! All arithmetic is wrapping on u64, so the stream depends only on the seed,
//! never on the platform. Bounded draws use rejection sampling, which keeps
//! them exactly uniform and reproducible from the raw stream.

/// SplitMix64 generator. The full state is one u64.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from [0, bound) by rejection; bound must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        // Accept only the top region whose size is a multiple of bound.
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % bound;
            }
        }
    }

    /// Uniform draw from [lo, hi] inclusive.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi);
        lo + self.below(hi - lo + 1)
    }
}
