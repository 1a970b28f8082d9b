//! Toeplitz matrices over GF(2) and their application to keys.
//!
//! A seed of `n + m - 1` bits defines the `n x m` matrix
//! `T[i][j] = bits[i - j + m - 1]`; the output is the row-vector product
//! `y = k T`, i.e. `y[j] = XOR_i k[i] & bits[i + m - 1 - j]`.
//! With `n == m` and a single one at index `m - 1`, `T` is the identity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::block::extract_bits;
use super::clmul::poly_mul;
use super::{BitBlock, BitError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToeplitzSeed {
    n: usize,
    m: usize,
    bits: BitBlock,
}

impl ToeplitzSeed {
    pub fn new(n: usize, m: usize, bits: BitBlock) -> Result<Self, BitError> {
        if n == 0 || m == 0 || m > n {
            return Err(BitError::Matrix(format!(
                "Toeplitz shape {n}x{m} needs 1 <= m <= n"
            )));
        }
        if bits.len() != n + m - 1 {
            return Err(BitError::Dimension {
                expected: n + m - 1,
                actual: bits.len(),
            });
        }
        Ok(ToeplitzSeed { n, m, bits })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self, BitError> {
        let len = (n + m).saturating_sub(1);
        Self::new(n, m, BitBlock::random(len, rng))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bits(&self) -> &BitBlock {
        &self.bits
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.bits.get(i + self.m - 1 - j)
    }

    /// Column `j` of `T`: the `n` seed bits starting at `m - 1 - j`.
    pub fn column(&self, j: usize) -> BitBlock {
        self.bits.slice(self.m - 1 - j, self.n)
    }

    fn check_input(&self, k: &BitBlock) -> Result<(), BitError> {
        if k.len() != self.n {
            return Err(BitError::Dimension {
                expected: self.n,
                actual: k.len(),
            });
        }
        Ok(())
    }
}

/// Direct evaluation, one column dot product per output bit: `O(n m / 64)`.
pub fn toeplitz_apply_naive(k: &BitBlock, t: &ToeplitzSeed) -> Result<BitBlock, BitError> {
    t.check_input(k)?;
    let seed = t.bits.words();
    let key = k.words();
    let mut out = BitBlock::zeros(t.m);
    for j in 0..t.m {
        let col = extract_bits(seed, t.m - 1 - j, t.n);
        let ones: u32 = key.iter().zip(&col).map(|(a, b)| (a & b).count_ones()).sum();
        if ones & 1 == 1 {
            out.set(j, true);
        }
    }
    Ok(out)
}

/// Same product through one carry-less polynomial multiplication.
///
/// With `r` the seed reversed, `y[j]` is coefficient `n - 1 + j` of `k(x) r(x)`.
pub fn toeplitz_apply_fast(k: &BitBlock, t: &ToeplitzSeed) -> Result<BitBlock, BitError> {
    t.check_input(k)?;
    let rev = t.bits.reversed();
    let prod = poly_mul(k.words(), rev.words());
    Ok(BitBlock::from_words(t.m, extract_bits(&prod, t.n - 1, t.m)))
}
