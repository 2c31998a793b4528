//! Seedable, platform-independent uniform random source.
//!
//! Every sampler draws from an [`RngStream`], a thin wrapper around the
//! ChaCha8 generator. ChaCha has a fixed, documented output stream, so a run
//! is reproducible from its seed alone, on any platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

/// Grid step of the unit-interval output: raw 64-bit words are reduced to 53
/// bits, so `unit` values are multiples of 2^-53. A raw zero is remapped onto
/// the first grid point, which keeps `log_uniform01` finite.
pub const UNIT_STEP: f64 = 1.0 / ((1u64 << 53) as f64);

#[derive(Debug, Error, PartialEq)]
pub enum RngError {
    #[error("uniform interval must satisfy a < b with both finite, got [{a}, {b})")]
    BadInterval { a: f64, b: f64 },
}

/// Deterministic uniform stream. Single-owner: clone it or use
/// [`RngStream::derive`] to hand independent streams to parallel chains.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for chain `chain_id`, decorrelated from every other chain
    /// derived from the same base seed.
    pub fn derive(seed: u64, chain_id: u64) -> Self {
        let mixed = splitmix64(seed ^ splitmix64(chain_id.wrapping_add(0x9E37_79B9_7F4A_7C15)));
        Self::new(mixed)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Next value on the 2^-53 grid, strictly inside (0, 1).
    pub fn unit(&mut self) -> f64 {
        let u = (self.inner.next_u64() >> 11) as f64 * UNIT_STEP;
        if u == 0.0 {
            UNIT_STEP
        } else {
            u
        }
    }

    /// Uniform draw in [a, b), computed as `a + (b - a) * u`.
    ///
    /// When `b - a` underflows relative to `|b|` the product can round onto
    /// `b` itself; such draws are pulled back to the largest double below `b`
    /// so the half-open contract holds exactly.
    pub fn uniform(&mut self, a: f64, b: f64) -> Result<f64, RngError> {
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(RngError::BadInterval { a, b });
        }
        let v = a + (b - a) * self.unit();
        if v < b {
            Ok(v)
        } else {
            Ok(next_below(b).max(a))
        }
    }

    /// log(u) with u uniform on (0, 1); bounded below by log(2^-53) ≈ -36.74.
    pub fn log_uniform01(&mut self) -> f64 {
        self.unit().ln()
    }
}

/// Largest double strictly below `x` (x finite, nonzero result not needed
/// beyond interval endpoints).
fn next_below(x: f64) -> f64 {
    debug_assert!(x.is_finite());
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits - 1)
    } else if x < 0.0 {
        f64::from_bits(bits + 1)
    } else {
        -f64::MIN_POSITIVE
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
