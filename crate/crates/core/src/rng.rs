//! Deterministic random streams and the samplers used by the simulators.
//!
//! Streams are keyed by `(seed, stream id)` on a counter-based generator
//! (ChaCha), so any unit of work — a trajectory, a grid node, a replica —
//! owns a private stream and results are independent of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::kernels::f;

/// Generator for one work unit, keyed by `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Pack a two-level id (e.g. grid node, trajectory) into one stream id.
/// Both components must stay below 2^32 for collision-freedom.
#[inline]
pub fn stream_id(hi: u32, lo: u32) -> u64 {
    ((hi as u64) << 32) | lo as u64
}

/// Standard normal sampler (Marsaglia polar method, spare cached).
#[derive(Debug, Default, Clone)]
pub struct Gaussian {
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new() -> Self {
        Gaussian { spare: None }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * rng.gen::<f64>() - 1.0;
            let v = 2.0 * rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = f::sqrt(-2.0 * f::ln(s) / s);
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }
}

/// Poisson sample. Sequential inversion below mean 10, transformed
/// rejection (PTRS) above.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    debug_assert!(mean >= 0.0 && mean.is_finite());
    if mean <= 0.0 {
        return 0;
    }
    if mean < 10.0 {
        let l = f::exp(-mean);
        let mut k = 0u64;
        let mut p = 1.0;
        loop {
            p *= rng.gen::<f64>();
            if p <= l {
                return k;
            }
            k += 1;
        }
    } else {
        poisson_ptrs(mean, rng)
    }
}

fn poisson_ptrs<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let b = 0.931 + 2.53 * f::sqrt(mean);
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    let ln_mean = f::ln(mean);
    loop {
        let v = rng.gen::<f64>();
        let u = rng.gen::<f64>() - 0.5;
        let us = 0.5 - f::abs(u);
        let k = f::floor((2.0 * a / us + b) * u + mean + 0.43);
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = f::ln(v * inv_alpha / (a / (us * us) + b));
        if lhs <= k * ln_mean - mean - f::lgamma(k + 1.0) {
            return k as u64;
        }
    }
}
