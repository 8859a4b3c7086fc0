//! Seeded randomness: per-trial seed derivation and Gaussian sampling.

use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{cos, ln, sin, sqrt};

/// The PRNG used throughout the crate.
pub type SignalRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SignalRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a master seed with a stream index (splitmix64 finalizer), so trial
/// `i` always sees the same stream regardless of execution order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Box–Muller standard normal sampler that caches the second variate.
#[derive(Debug, Clone)]
pub struct Gaussian {
    spare: Option<f64>,
}

impl Default for Gaussian {
    fn default() -> Self {
        Self::new()
    }
}

impl Gaussian {
    pub fn new() -> Self {
        Gaussian { spare: None }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log finite.
        let u1 = 1.0 - rng.gen::<f64>();
        let u2 = rng.gen::<f64>();
        let radius = sqrt(-2.0 * ln(u1));
        let angle = 2.0 * PI * u2;
        self.spare = Some(radius * sin(angle));
        radius * cos(angle)
    }
}
