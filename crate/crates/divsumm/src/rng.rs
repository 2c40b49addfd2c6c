//! Seeded pseudo-random number generation.
//!
//! Everything random in this crate (document subsampling, K-Means++ seeding,
//! reference picking) flows through [`Xorshift64Star`], a generator specified
//! here by its algorithm so that any implementation in any language can
//! reproduce the exact same draws from the same seed:
//!
//! * state update: `s ^= s >> 12; s ^= s << 25; s ^= s >> 27`
//! * output: `s.wrapping_mul(0x2545_F491_4F6C_DD1D)`
//! * seeding: the raw seed is passed through one round of SplitMix64
//!   (`z = seed + 0x9E37_79B9_7F4A_7C15; z = (z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9;
//!   z = (z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB; z ^ (z >> 31)`) and a zero
//!   result is replaced by `0x9E37_79B9_7F4A_7C15` since xorshift state must
//!   be nonzero.

/// Source of uniform random draws. The concrete generator is
/// [`Xorshift64Star`]; tests may substitute a scripted stub.
pub trait RandomSource {
    fn next_u64(&mut self) -> u64;

    /// Uniform draw in `[0, 1)` using the top 53 bits.
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`, computed as `next_u64() % n`.
    ///
    /// The modulo rule is part of the reproducibility contract; the bias is
    /// negligible for the small `n` used here.
    fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0) is meaningless");
        (self.next_u64() % n as u64) as usize
    }

    /// Index drawn with probability proportional to `weights[i]`.
    ///
    /// Falls back to the lowest index with nonzero weight when rounding makes
    /// the cumulative walk run past the end. Returns `None` when the total
    /// weight is zero.
    fn weighted(&mut self, weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let mut r = self.next_f64() * total;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            if r < w {
                return Some(i);
            }
            r -= w;
        }
        weights.iter().rposition(|&w| w > 0.0)
    }

    /// `k` distinct indices from `[0, n)`, returned in ascending order.
    ///
    /// Implemented as a partial Fisher-Yates shuffle; the ascending sort at
    /// the end makes the selection order-independent of the draw order.
    fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        let mut picked = pool[..k].to_vec();
        picked.sort_unstable();
        picked
    }
}

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(SPLITMIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Marsaglia xorshift64* generator with SplitMix64 seeding.
#[derive(Debug, Clone)]
pub struct Xorshift64Star {
    state: u64,
}

impl Xorshift64Star {
    pub fn seeded(seed: u64) -> Self {
        let mut state = splitmix64(seed);
        if state == 0 {
            state = SPLITMIX_GAMMA;
        }
        Self { state }
    }

    /// Independent stream `stream` of the generator family rooted at `seed`.
    ///
    /// Derived as `seeded(splitmix64(seed) ^ splitmix64(stream + 1))`, so
    /// stream 0 differs from plain `seeded(seed)` and streams never collide
    /// for distinct `(seed, stream)` pairs in practice.
    pub fn stream(seed: u64, stream: u64) -> Self {
        Self::seeded(splitmix64(seed) ^ splitmix64(stream.wrapping_add(1)))
    }
}

impl RandomSource for Xorshift64Star {
    fn next_u64(&mut self) -> u64 {
        let mut s = self.state;
        s ^= s >> 12;
        s ^= s << 25;
        s ^= s >> 27;
        self.state = s;
        s.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }
}
