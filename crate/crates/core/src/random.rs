//! Deterministic random streams.
//!
//! Every stochastic quantity in the crate is drawn from a stream identified by
//! `(seed, index)`. The stream for a given pair never depends on how many other
//! streams were drawn before it or on which thread draws it, so Monte-Carlo
//! estimates are bit-identical regardless of scheduling.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent generator for stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a child seed, used to give sub-tasks (noise, sampling, training)
/// non-overlapping families of streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finaliser over the pair
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard logistic variate by inverse CDF: `log(v / (1 - v))`, `v ~ U(0, 1)`.
pub fn logistic<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let v: f64 = Open01.sample(rng);
    (v / (1.0 - v)).ln()
}

pub fn logistic_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| logistic(rng)).collect()
}

/// Logistic sigmoid `1 / (1 + e^{-x})`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `log(p / (1 - p))` clamped to `[-limit, limit]`.
pub fn clamped_logit(p: f64, limit: f64) -> f64 {
    let l = (p / (1.0 - p)).ln();
    if l.is_nan() {
        0.0
    } else {
        l.clamp(-limit, limit)
    }
}
