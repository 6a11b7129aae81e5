//! Counter-based deterministic random values.
//!
//! Simulations must be bit-reproducible from `(seed, counter)` alone, with no
//! generator state threaded through the code. Each draw hashes the seed, a
//! stream tag, and a counter through a splitmix64-style finalizer.

/// splitmix64 avalanche of a 64-bit word.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic 64-bit value for `(seed, stream, counter)`.
pub fn value(seed: u64, stream: u64, counter: u64) -> u64 {
    mix(mix(mix(seed) ^ stream) ^ counter)
}

/// Deterministic uniform draw in `[0, 1)` for `(seed, stream, counter)`.
pub fn unit_f64(seed: u64, stream: u64, counter: u64) -> f64 {
    // 53 mantissa bits give the full dyadic grid in [0, 1)
    (value(seed, stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential generator for test-instance construction; same core as `value`.
#[derive(Debug, Clone)]
pub struct Counter {
    seed: u64,
    stream: u64,
    counter: u64,
}

impl Counter {
    pub fn new(seed: u64, stream: u64) -> Self {
        Counter { seed, stream, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = value(self.seed, self.stream, self.counter);
        self.counter += 1;
        v
    }

    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }
}
