//! Seeded random streams.
//!
//! Every sampler in the crate draws from [`SplitMix64`], a counter-based
//! generator whose whole state is one 64-bit word. Output `k` of the stream
//! seeded with `s` is `mix(s + (k+1)·GAMMA)`, so any implementation with the
//! constants below reproduces the stream bit for bit.
//!
//! Gaussian variates come from Box–Muller in a fixed order: two uniforms
//! `u1, u2` are drawn, and the pair `(r cos 2πu2, r sin 2πu2)` with
//! `r = sqrt(-2 ln(1 - u1))` is emitted, cosine first.

use num_complex::Complex64;

/// Weyl increment (golden ratio in 64-bit fixed point).
pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
/// First multiplier of the output mix.
pub const MIX1: u64 = 0xBF58_476D_1CE4_E5B9;
/// Second multiplier of the output mix.
pub const MIX2: u64 = 0x94D0_49BB_1331_11EB;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(MIX1);
        z = (z ^ (z >> 27)).wrapping_mul(MIX2);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`, safe to take the logarithm of.
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal variate.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    /// Complex Gaussian with independent standard-normal real and imaginary parts.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let re = self.gaussian();
        let im = self.gaussian();
        Complex64::new(re, im)
    }

    /// Exponential variate with unit rate.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open0().ln()
    }

    /// Flat Dirichlet weights of length `k`: normalized unit exponentials.
    pub fn dirichlet(&mut self, k: usize) -> Vec<f64> {
        let mut w: Vec<f64> = (0..k).map(|_| self.exponential()).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        w
    }
}

/// Per-trial seed derivation used by every parallel loop.
#[inline]
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}
