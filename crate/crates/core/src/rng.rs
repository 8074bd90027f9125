//! Portable deterministic pseudorandom numbers.
//!
//! A 64-bit linear congruential generator with Knuth's MMIX constants. Every
//! stochastic routine in the crate takes a `&mut DeterministicRng`; nothing
//! seeds from the clock, so a seed fully determines every run.

use crate::error::{Error, Result};

const MULTIPLIER: u64 = 6364136223846793005;
const INCREMENT: u64 = 1442695040888963407;

#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicRng {
    state: u64,
    cached_gaussian: Option<f64>,
}

impl DeterministicRng {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            cached_gaussian: None,
        }
    }

    /// Seed for the `index`-th parallel worker derived from a base seed.
    pub fn worker(base_seed: u64, index: usize) -> Self {
        Self::new(base_seed.wrapping_add(index as u64))
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)` built from the top 53 bits.
    pub fn next_double(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_double()
    }

    /// `true` with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_double() < p
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    ///
    /// Multiply-shift with rejection (Lemire), so the result depends on the
    /// high bits of the generator and carries no modulo bias.
    pub fn next_range(&mut self, lo: i64, hi: i64) -> Result<i64> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!(
                "next_range: lo ({lo}) > hi ({hi})"
            )));
        }
        let span = (hi as i128 - lo as i128 + 1) as u128;
        if span > u64::MAX as u128 {
            return Ok(self.next_u64() as i64);
        }
        let span = span as u64;
        let threshold = span.wrapping_neg() % span;
        loop {
            let product = self.next_u64() as u128 * span as u128;
            if (product as u64) >= threshold {
                return Ok((lo as i128 + (product >> 64) as i128) as i64);
            }
        }
    }

    /// Uniform index in `[0, n)`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index() needs a non-empty range");
        self.next_range(0, n as i64 - 1).expect("valid range") as usize
    }

    /// In-place Fisher-Yates, walking from the last index down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_range(0, i as i64).expect("valid range") as usize;
            items.swap(i, j);
        }
    }

    /// Standard normal variate (Box-Muller, second value of each pair cached).
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.cached_gaussian.take() {
            return z;
        }
        // 1 - u keeps the log argument in (0, 1].
        let u1 = 1.0 - self.next_double();
        let u2 = self.next_double();
        let radius = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_gaussian = Some(radius * theta.sin());
        radius * theta.cos()
    }
}
