//! Deterministic per-task random streams derived from one master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream families, so e.g. training-set draw `i` and
/// validation-set draw `i` never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Train = 1,
    Validation = 2,
    Coverage = 3,
    AbcPool = 4,
    Predictive = 5,
    Posterior = 6,
    Init = 7,
    Shuffle = 8,
    Simulate = 9,
    Replicate = 10,
}

/// ChaCha stream `index` of the key derived from `(master, domain)`.
pub fn stream(master: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let key = master ^ (domain as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}
