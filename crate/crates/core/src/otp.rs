//! Pre-shared one-time-pad material.

use rand::Rng;

use crate::bitlinalg::BitBlock;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("one-time pad exhausted: requested {requested} bits, {available} left")]
pub struct OtpExhausted {
    pub requested: usize,
    pub available: usize,
}

/// Secret bits agreed in an earlier session. Alice and Bob hold identical
/// copies and consume them in lockstep, so one store models both.
#[derive(Debug, Clone)]
pub struct KeyStore {
    bits: BitBlock,
    used: usize,
}

impl KeyStore {
    pub fn new(bits: BitBlock) -> Self {
        KeyStore { bits, used: 0 }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::new(BitBlock::random(len, rng))
    }

    pub fn available(&self) -> usize {
        self.bits.len() - self.used
    }

    pub fn consumed(&self) -> usize {
        self.used
    }

    /// Next `len` pad bits; never hands out the same bit twice.
    pub fn consume(&mut self, len: usize) -> Result<BitBlock, OtpExhausted> {
        if len > self.available() {
            return Err(OtpExhausted {
                requested: len,
                available: self.available(),
            });
        }
        let pad = self.bits.slice(self.used, len);
        self.used += len;
        Ok(pad)
    }
}
