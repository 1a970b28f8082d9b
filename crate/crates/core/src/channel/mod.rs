//! Binary symmetric channels, cut-and-choose error estimation and leakage
//! bookkeeping.

mod entropy;
mod ledger;
pub mod rng;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::BitBlock;
pub use entropy::binary_entropy;
pub(crate) use entropy::h2;
pub use ledger::{LeakageEntry, LeakageLedger, Party};
use rng::{substream, Stream};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ChannelError {
    #[error("probability {0} outside its domain")]
    Domain(f64),
    #[error("key lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("sample of {sample} bits from a {len}-bit key leaves nothing to use")]
    Sample { sample: usize, len: usize },
}

/// Flip probabilities towards Bob (`e`) and Eve (`d`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub e: f64,
    pub d: f64,
    pub seed: u64,
}

impl ChannelParams {
    pub fn new(e: f64, d: f64, seed: u64) -> Result<Self, ChannelError> {
        let p = ChannelParams { e, d, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        for x in [self.e, self.d] {
            if !(0.0..=0.5).contains(&x) {
                return Err(ChannelError::Domain(x));
            }
        }
        Ok(())
    }
}

/// Output of one channel use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub k_b: BitBlock,
    pub k_e: BitBlock,
    pub e_vec: BitBlock,
}

/// Sends `k_a` through two independent BSCs. `block` separates channel uses
/// under the same seed.
pub fn transmit(k_a: &BitBlock, p: &ChannelParams, block: u64) -> Result<Transmission, ChannelError> {
    p.validate()?;
    let n = k_a.len();
    let e_vec = BitBlock::bernoulli(n, p.e, &mut substream(p.seed, Stream::BobNoise, block));
    let eve_noise = BitBlock::bernoulli(n, p.d, &mut substream(p.seed, Stream::EveNoise, block));
    Ok(Transmission {
        k_b: k_a ^ &e_vec,
        k_e: k_a ^ &eve_noise,
        e_vec,
    })
}

/// Alice's raw key for `block`.
pub fn raw_key(n: usize, seed: u64, block: u64) -> BitBlock {
    BitBlock::random(n, &mut substream(seed, Stream::AliceKey, block))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QberEstimate {
    pub qber: f64,
    pub sample_size: usize,
    pub k_a: BitBlock,
    pub k_b: BitBlock,
}

/// Publicly compares `floor(fraction * n)` uniformly chosen positions and
/// discards them from both keys. Each compared bit is one ledger bit; since
/// the positions are dropped, none of them counts against the key.
pub fn estimate_qber<R: Rng + ?Sized>(
    k_a: &BitBlock,
    k_b: &BitBlock,
    sample_fraction: f64,
    ledger: &mut LeakageLedger,
    rng: &mut R,
) -> Result<QberEstimate, ChannelError> {
    let n = k_a.len();
    if k_b.len() != n {
        return Err(ChannelError::LengthMismatch(n, k_b.len()));
    }
    if !(sample_fraction > 0.0 && sample_fraction < 1.0) {
        return Err(ChannelError::Domain(sample_fraction));
    }
    let sample = (sample_fraction * n as f64).floor() as usize;
    if sample == 0 || sample >= n {
        return Err(ChannelError::Sample { sample, len: n });
    }
    let mut idx = rand::seq::index::sample(rng, n, sample).into_vec();
    idx.sort_unstable();
    let mismatches = idx.iter().filter(|&&i| k_a.get(i) != k_b.get(i)).count();
    ledger.record_neutral("qber_sample", sample, Party::Alice, Party::Public);
    Ok(QberEstimate {
        qber: mismatches as f64 / sample as f64,
        sample_size: sample,
        k_a: k_a.remove_sorted(&idx),
        k_b: k_b.remove_sorted(&idx),
    })
}
