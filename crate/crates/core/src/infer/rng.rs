//! Random streams keyed by position, so that results do not depend on the
//! order in which particles are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream used for resampling decisions rather than a particle.
pub const RESAMPLE_STREAM: u64 = u64::MAX;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the key components into one 64-bit value.
pub fn key(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5851_f42d_4c95_7f2d, |h, &p| splitmix(h ^ splitmix(p)))
}

/// The generator of one particle at one step of one `infer` instance.
pub fn stream(seed: u64, site: u32, context: u64, step: u64, particle: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(key(&[seed, site as u64, context, step, particle]))
}

/// Context identifier handed to `infer`s nested in a particle; never zero.
pub fn context(site: u32, context: u64, step: u64, particle: u64) -> u64 {
    key(&[0xc0_17e7, site as u64, context, step, particle]) | 1
}
