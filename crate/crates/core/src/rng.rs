//! Seeded multi-stream random number generation.
//!
//! Every subsystem draws from its own named stream so that adding draws in
//! one subsystem cannot perturb the sequences seen by another. A stream is
//! fully determined by `(master_seed, label)`.

use alloc::string::String;

/// Identifies one named draw stream derived from the master seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_label: String,
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// xoshiro256** generator seeded from `(master_seed, label)`.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    pub fn from_stream(master_seed: u64, label: &str) -> Self {
        let mut sm = master_seed ^ fnv1a(label.as_bytes());
        // A zero state would be degenerate; splitmix64 never yields four zeros.
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.uniform() * (hi - lo)
    }

    /// Uniform in (0, hi]. Used for backoff delays, which must be nonzero.
    pub fn uniform_open0(&mut self, hi: f64) -> f64 {
        let u = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        u * hi
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self, mean: f64, sd: f64) -> f64 {
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        mean + sd * r * libm::cos(2.0 * core::f64::consts::PI * u2)
    }

    /// Uniform integer in [lo, hi] inclusive.
    pub fn int_range(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        let span = hi - lo + 1;
        if span == 0 {
            // Full u64 range.
            return self.next_u64();
        }
        lo + self.next_u64() % span
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        if items.is_empty() {
            return;
        }
        for i in (1..items.len()).rev() {
            let j = self.int_range(0, i as u64) as usize;
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_same_sequence() {
        let mut a = Rng::from_stream(42, "mobility");
        let mut b = Rng::from_stream(42, "mobility");
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_labels_distinct_sequences() {
        let mut a = Rng::from_stream(42, "mobility");
        let mut b = Rng::from_stream(42, "traffic");
        let same = (0..100).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn gaussian_mean_converges() {
        // Law of large numbers: 1e5 standard normal samples, mean within 0.02.
        let mut rng = Rng::from_stream(7, "gauss-test");
        let n = 100_000;
        let sum: f64 = (0..n).map(|_| rng.gaussian(0.0, 1.0)).sum();
        let mean = sum / n as f64;
        assert!(mean.abs() < 0.02, "sample mean {mean} out of band");
    }

    #[test]
    fn int_range_degenerate() {
        let mut rng = Rng::from_stream(1, "int");
        assert_eq!(rng.int_range(0, 0), 0);
        assert_eq!(rng.int_range(9, 9), 9);
    }

    #[test]
    fn uniform_open0_is_positive() {
        let mut rng = Rng::from_stream(3, "backoff");
        for _ in 0..10_000 {
            let v = rng.uniform_open0(0.002);
            assert!(v > 0.0 && v <= 0.002);
        }
    }
}
