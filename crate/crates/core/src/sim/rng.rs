//! Seeded randomness for behavior draws.
//!
//! Every node gets its own substream derived from (scenario seed, node id),
//! so adding or removing a node never perturbs the draws of the others.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use super::digest::Fnv1a64;
use crate::opinion::NodeId;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the per-node generator for `node` under the scenario `seed`.
pub(crate) fn node_rng(seed: u64, node: &NodeId) -> ChaCha12Rng {
    let mut h = Fnv1a64::new();
    h.update(&seed.to_le_bytes());
    h.update(&[0]);
    h.update(node.as_str().as_bytes());
    let mut state = h.finish();
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Uniform draw in [0, 1) with 53 bits of precision.
pub(crate) fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
