//! Packed bit vectors over GF(2).
//!
//! Bit `i` lives in bit `i % 64` of word `i / 64`. Serialized as bytes this is
//! the LSB-first convention used on every wire format and fixture: bit `i` is
//! bit `i % 8` of byte `i / 8`.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::BitError;

/// Fixed-length bit vector. Padding bits beyond `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitBlock {
    len: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitBlock {
    pub fn zeros(len: usize) -> Self {
        BitBlock {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = BitBlock {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        b.clear_padding();
        b
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut b = Self::zeros(len);
        b.set(index, true);
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &bit) in bits.iter().enumerate() {
            if bit {
                b.words[i / 64] |= 1 << (i % 64);
            }
        }
        b
    }

    /// Builds a block from words; bits past `len` are masked off.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut b = BitBlock { len, words };
        b.clear_padding();
        b
    }

    /// Decodes `ceil(len/8)` LSB-first bytes. Non-zero padding bits are rejected.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, BitError> {
        let need = len.div_ceil(8);
        if bytes.len() != need {
            return Err(BitError::ByteLength {
                expected: need,
                actual: bytes.len(),
            });
        }
        let mut words = vec![0u64; words_for(len)];
        for (i, &byte) in bytes.iter().enumerate() {
            words[i / 8] |= (byte as u64) << (8 * (i % 8));
        }
        let b = BitBlock { len, words };
        let mut masked = b.clone();
        masked.clear_padding();
        if masked != b {
            return Err(BitError::NonZeroPadding);
        }
        Ok(b)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push((self.words[i / 8] >> (8 * (i % 8))) as u8);
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.random::<u64>()).collect();
        Self::from_words(len, words)
    }

    /// Each bit independently one with probability `p`.
    pub fn bernoulli<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Self {
        let mut b = Self::zeros(len);
        if p <= 0.0 {
            return b;
        }
        if p >= 1.0 {
            return Self::ones(len);
        }
        for i in 0..len {
            if rng.random_bool(p) {
                b.words[i / 64] |= 1 << (i % 64);
            }
        }
        b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn xor(&self, other: &BitBlock) -> Result<BitBlock, BitError> {
        let mut out = self.clone();
        out.xor_in_place(other)?;
        Ok(out)
    }

    pub fn xor_in_place(&mut self, other: &BitBlock) -> Result<(), BitError> {
        if self.len != other.len {
            return Err(BitError::Dimension {
                expected: self.len,
                actual: other.len,
            });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn and(&self, other: &BitBlock) -> Result<BitBlock, BitError> {
        if self.len != other.len {
            return Err(BitError::Dimension {
                expected: self.len,
                actual: other.len,
            });
        }
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        Ok(BitBlock {
            len: self.len,
            words,
        })
    }

    pub fn not(&self) -> BitBlock {
        let mut out = BitBlock {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_padding();
        out
    }

    /// Parity of `self AND other`.
    pub fn dot(&self, other: &BitBlock) -> Result<bool, BitError> {
        if self.len != other.len {
            return Err(BitError::Dimension {
                expected: self.len,
                actual: other.len,
            });
        }
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones & 1 == 1)
    }

    /// Bits `[start, start + len)` as a new block.
    pub fn slice(&self, start: usize, len: usize) -> BitBlock {
        assert!(start + len <= self.len, "slice out of range");
        BitBlock::from_words(len, extract_bits(&self.words, start, len))
    }

    pub fn concat(parts: &[&BitBlock]) -> BitBlock {
        let total = parts.iter().map(|p| p.len).sum();
        let mut out = BitBlock::zeros(total);
        let mut offset = 0;
        for p in parts {
            out.write_at(offset, p);
            offset += p.len;
        }
        out
    }

    /// Overwrites bits `[offset, offset + src.len)` with `src`.
    pub fn write_at(&mut self, offset: usize, src: &BitBlock) {
        assert!(offset + src.len <= self.len, "write out of range");
        let sh = offset % 64;
        let w0 = offset / 64;
        for (k, &word) in src.words.iter().enumerate() {
            let bits = (src.len - k * 64).min(64);
            let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
            let lo_mask = mask << sh;
            let dst = &mut self.words[w0 + k];
            *dst = (*dst & !lo_mask) | ((word << sh) & lo_mask);
            if sh != 0 && bits + sh > 64 {
                let hi_mask = mask >> (64 - sh);
                let dst = &mut self.words[w0 + k + 1];
                *dst = (*dst & !hi_mask) | ((word >> (64 - sh)) & hi_mask);
            }
        }
    }

    /// Bit order reversed: `out[i] = self[len - 1 - i]`.
    pub fn reversed(&self) -> BitBlock {
        if self.len == 0 {
            return self.clone();
        }
        let nw = self.words.len();
        let mut words: Vec<u64> = self.words.iter().rev().map(|w| w.reverse_bits()).collect();
        // the reversed block is left-aligned in nw*64 bits; shift down by the pad
        let pad = nw * 64 - self.len;
        if pad > 0 {
            words = extract_bits(&words, pad, self.len);
        }
        BitBlock::from_words(self.len, words)
    }

    /// Keeps the bits at `indices` (in the given order).
    pub fn select(&self, indices: &[usize]) -> BitBlock {
        let mut out = BitBlock::zeros(indices.len());
        for (k, &i) in indices.iter().enumerate() {
            if self.get(i) {
                out.words[k / 64] |= 1 << (k % 64);
            }
        }
        out
    }

    /// Drops the bits at the (sorted, unique) `indices`.
    pub fn remove_sorted(&self, indices: &[usize]) -> BitBlock {
        let mut out = BitBlock::zeros(self.len - indices.len());
        let mut skip = indices.iter().peekable();
        let mut k = 0;
        for i in 0..self.len {
            if skip.peek() == Some(&&i) {
                skip.next();
                continue;
            }
            if self.get(i) {
                out.words[k / 64] |= 1 << (k % 64);
            }
            k += 1;
        }
        out
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

/// Extracts `len` bits starting at bit `start` of a word slice. Bits read past
/// the end of `words` are zero.
pub(crate) fn extract_bits(words: &[u64], start: usize, len: usize) -> Vec<u64> {
    let nw = words_for(len);
    let mut out = vec![0u64; nw];
    let w0 = start / 64;
    let sh = start % 64;
    for (k, o) in out.iter_mut().enumerate() {
        let lo = words.get(w0 + k).copied().unwrap_or(0);
        if sh == 0 {
            *o = lo;
        } else {
            let hi = words.get(w0 + k + 1).copied().unwrap_or(0);
            *o = (lo >> sh) | (hi << (64 - sh));
        }
    }
    let rem = len % 64;
    if rem != 0 {
        if let Some(last) = out.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
    out
}

impl BitXor for &BitBlock {
    type Output = BitBlock;

    /// Panics on length mismatch; use [`BitBlock::xor`] for the checked form.
    fn bitxor(self, rhs: &BitBlock) -> BitBlock {
        self.xor(rhs).expect("xor of blocks with different lengths")
    }
}

impl BitXorAssign<&BitBlock> for BitBlock {
    fn bitxor_assign(&mut self, rhs: &BitBlock) {
        self.xor_in_place(rhs)
            .expect("xor of blocks with different lengths")
    }
}

impl fmt::Debug for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
            write!(f, "BitBlock({}: {s})", self.len)
        } else {
            write!(f, "BitBlock({} bits, weight {})", self.len, self.weight())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BitBlockRepr {
    len: usize,
    hex: String,
}

impl Serialize for BitBlock {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let hex = self.to_bytes().iter().map(|b| format!("{b:02x}")).collect();
        BitBlockRepr { len: self.len, hex }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitBlock {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = BitBlockRepr::deserialize(d)?;
        if repr.hex.len() % 2 != 0 {
            return Err(D::Error::custom("odd hex length"));
        }
        let bytes = (0..repr.hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&repr.hex[i..i + 2], 16))
            .collect::<Result<Vec<u8>, _>>()
            .map_err(D::Error::custom)?;
        BitBlock::from_bytes(&bytes, repr.len).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bytes_are_lsb_first() {
        let b = BitBlock::from_bools(&[true, false, false, false, false, false, false, false, false, true]);
        assert_eq!(b.to_bytes(), vec![0x01, 0x02]);
        assert_eq!(BitBlock::from_bytes(&[0x01, 0x02], 10).unwrap(), b);
    }

    #[test]
    fn from_bytes_rejects_dirty_padding() {
        assert!(matches!(
            BitBlock::from_bytes(&[0xff, 0x04], 10),
            Err(BitError::NonZeroPadding)
        ));
        assert!(matches!(
            BitBlock::from_bytes(&[0xff], 10),
            Err(BitError::ByteLength { .. })
        ));
    }

    #[test]
    fn ones_keeps_padding_clear() {
        let b = BitBlock::ones(70);
        assert_eq!(b.weight(), 70);
        assert_eq!(b.not().weight(), 0);
    }

    #[test]
    fn remove_and_select_partition() {
        let b = BitBlock::from_bools(&[true, false, true, true, false]);
        assert_eq!(b.select(&[0, 3]), BitBlock::from_bools(&[true, true]));
        assert_eq!(
            b.remove_sorted(&[0, 3]),
            BitBlock::from_bools(&[false, true, false])
        );
    }

    #[test]
    fn xor_length_mismatch() {
        let a = BitBlock::zeros(3);
        let b = BitBlock::zeros(4);
        assert!(matches!(a.xor(&b), Err(BitError::Dimension { .. })));
    }

    proptest! {
        #[test]
        fn reverse_matches_bitwise(bits in prop::collection::vec(any::<bool>(), 0..300)) {
            let b = BitBlock::from_bools(&bits);
            let mut rev = bits.clone();
            rev.reverse();
            prop_assert_eq!(b.reversed(), BitBlock::from_bools(&rev));
        }

        #[test]
        fn slice_and_write_agree(bits in prop::collection::vec(any::<bool>(), 1..300), a in 0usize..300, l in 0usize..300) {
            let start = a % bits.len();
            let len = l % (bits.len() - start + 1);
            let b = BitBlock::from_bools(&bits);
            let s = b.slice(start, len);
            prop_assert_eq!(s.to_bools(), bits[start..start + len].to_vec());
            let mut z = BitBlock::ones(bits.len());
            z.write_at(start, &s);
            for (i, &bit) in bits.iter().enumerate() {
                let expect = if i >= start && i < start + len { bit } else { true };
                prop_assert_eq!(z.get(i), expect);
            }
        }

        #[test]
        fn serde_round_trip(bits in prop::collection::vec(any::<bool>(), 0..200)) {
            let b = BitBlock::from_bools(&bits);
            let json = serde_json::to_string(&b).unwrap();
            prop_assert_eq!(serde_json::from_str::<BitBlock>(&json).unwrap(), b);
        }
    }
}
