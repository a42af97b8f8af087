//! Seed-stream derivation.
//!
//! Every randomized stage takes a `u64` seed. Stages that need several
//! independent RNG streams derive them from one master seed with
//! [`derive`]; `ChaCha8Rng::seed_from_u64` expands the derived value
//! through splitmix64, so nearby inputs still yield unrelated streams.

/// Fixed stream tags for pipeline stages.
pub mod stream {
    pub const SPLIT: u64 = 1;
    pub const SMOTE: u64 = 2;
    pub const INIT: u64 = 3;
    pub const SYNTH: u64 = 4;
}

/// Derive the seed for a named stream from a master seed.
pub fn derive(master: u64, stream: u64) -> u64 {
    // splitmix64 of the combined value; good dispersion for sequential tags.
    let mut z = master
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
