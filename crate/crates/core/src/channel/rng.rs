//! Seedable, splittable randomness.
//!
//! Every consumer draws from its own ChaCha20 stream keyed by the session
//! seed, so e.g. Eve's noise is reproducible independently of Bob's.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream identities. The numeric value selects the ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Stream {
    AliceKey = 1,
    BobNoise = 2,
    EveNoise = 3,
    Sampling = 4,
    Dealer = 5,
    Sharing = 6,
    PaSeed = 7,
    Confirm = 8,
    KeyStore = 9,
    Attack = 10,
    Tamper = 11,
}

/// Independent generator for `(seed, stream, index)`; `index` separates
/// blocks or trials within one stream.
pub fn substream(seed: u64, stream: Stream, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 56) ^ index);
    rng
}
