//! SplitMix64, the single pseudo-random generator used throughout the crate.
//!
//! State update and output function (all arithmetic wrapping mod 2^64):
//!
//! ```text
//! state  = state + 0x9E3779B97F4A7C15
//! z      = state
//! z      = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z      = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! Uniform reals in [0, 1) take the top 53 bits: `(output >> 11) * 2^-53`.
//! Normal deviates use the Box-Muller transform on two uniforms and do not
//! cache the second value. Bounded integers use Lemire's multiply-shift
//! rejection method. These definitions are part of the fixture contract:
//! changing any of them changes every seeded fixture.

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Derives an independent stream for a sub-task, e.g. one stride or one k.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut mixer = Self::new(seed ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
        Self::new(mixer.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound). `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Standard normal deviate.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }

    /// Draws `count` distinct indices from `0..n` (partial Fisher-Yates),
    /// returned in ascending order.
    pub fn sample_indices(&mut self, n: usize, count: usize) -> alloc::vec::Vec<usize> {
        let count = count.min(n);
        let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool.sort_unstable();
        pool
    }
}
