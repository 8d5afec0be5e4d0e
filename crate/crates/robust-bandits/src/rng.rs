//! Deterministic seed derivation for named random streams.
//!
//! Every trial owns separate streams for the environment and for each agent,
//! all derived from `(base_seed, trial, tag, ...)`. Same inputs, same stream,
//! bit for bit — which is what makes manifests replayable and lets all agents
//! in a trial face identical environment draws (common random numbers).

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

/// Stream tag for environment draws (decision sets, sigma, noise).
pub const STREAM_ENV: u64 = 1;
/// Stream tag base for per-agent draws (level sampling); add the agent index.
pub const STREAM_AGENT: u64 = 2;

/// splitmix64 step; the standard 64-bit mixer.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapse `(base, parts...)` into a single 64-bit seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = base;
    let mut acc = splitmix64(&mut state);
    for &p in parts {
        state ^= p.wrapping_mul(0xff51_afd7_ed55_8ccd);
        acc ^= splitmix64(&mut state);
    }
    acc
}

/// A ChaCha stream for the given `(base, parts...)` name.
pub fn stream_rng(base: u64, parts: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(base, parts))
}

/// Order-sensitive FNV-1a accumulator; used to fingerprint the environment
/// realization a given agent faced within a trial.
#[derive(Debug, Clone)]
pub struct StreamHash(u64);

impl StreamHash {
    pub fn new() -> Self {
        StreamHash(0xcbf2_9ce4_8422_2325)
    }

    pub fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn write_f64(&mut self, v: f64) {
        self.write_u64(v.to_bits());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for StreamHash {
    fn default() -> Self {
        Self::new()
    }
}
