//! Per-record random streams.
//!
//! A record's stream is Xoshiro256++ seeded (through SplitMix64, as
//! `rand_xoshiro` does) from a 64-bit key mixing the global seed with the
//! record id:
//!
//! ```text
//! h = mix(global_seed)
//! for each 8-byte little-endian chunk c of the id (last chunk zero-padded):
//!     h = mix(h ^ c)
//! key = mix(h ^ id_len)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer (add the golden-ratio increment,
//! then the two xor-shift-multiply rounds).

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// SplitMix64 output function applied to a single value.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit key for `(global_seed, record_id)`.
pub fn record_key(global_seed: u64, record_id: &str) -> u64 {
    let bytes = record_id.as_bytes();
    let mut h = splitmix64(global_seed);
    for chunk in bytes.chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        h = splitmix64(h ^ u64::from_le_bytes(word));
    }
    splitmix64(h ^ bytes.len() as u64)
}

/// Random stream owned by one record.
#[derive(Debug, Clone)]
pub struct RecordRng {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

impl RecordRng {
    pub fn from_seed(seed: u64) -> Self {
        RecordRng {
            seed,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// The 64-bit key this stream was seeded from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform index in `0..n` from one draw (multiply-shift on the high
    /// 32 bits; exact for powers of two).
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0 && n <= u32::MAX as usize);
        (((self.next_u64() >> 32) * n as u64) >> 32) as usize
    }

    /// Uniform in `[0, 1)` with 53 bits from one draw.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Stream for one record under a global seed.
pub fn derive_rng(global_seed: u64, record_id: &str) -> RecordRng {
    RecordRng::from_seed(record_key(global_seed, record_id))
}
