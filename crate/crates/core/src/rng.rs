//! Counter-based (stateless) random draws.
//!
//! Every draw is a pure function of a 64-bit key built from the seed and the
//! logical coordinates of the draw (sample, mode, substep, ...). There is no
//! sequential generator state, so results are identical regardless of thread
//! scheduling or evaluation order. Not cryptographic; intended for Monte
//! Carlo reproducibility only.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const LANE_A: u64 = 0xD1B5_4A32_D192_ED03;
const LANE_B: u64 = 0x8CB9_2BA7_2F3D_8DD7;

/// splitmix64 finalizer: a bijective 64-bit mixer with full avalanche.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a key from the seed and three coordinate words.
#[inline]
pub(crate) fn key(seed: u64, a: u64, b: u64, c: u64) -> u64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN));
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    mix64(h ^ c)
}

/// Uniform in (0,1]; never returns zero, so it is safe under log.
#[inline]
fn uniform_open(bits: u64) -> f64 {
    (((bits >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
}

/// Uniform in [0,1).
#[inline]
pub(crate) fn uniform(k: u64) -> f64 {
    ((mix64(k ^ LANE_A) >> 11) as f64) * (1.0 / 9007199254740992.0)
}

/// Standard normal via Box–Muller on two independent lanes of the key.
#[inline]
pub(crate) fn standard_normal(k: u64) -> f64 {
    let u1 = uniform_open(mix64(k ^ LANE_A));
    let u2 = ((mix64(k ^ LANE_B) >> 11) as f64) * (1.0 / 9007199254740992.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
