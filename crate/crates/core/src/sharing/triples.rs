use rand::Rng;

use super::SharingError;
use crate::bitlinalg::BitBlock;

/// One party's packed shares of `count` triples; bit `k` of `a`, `b`, `c`
/// belongs to triple `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleShares {
    pub a: BitBlock,
    pub b: BitBlock,
    pub c: BitBlock,
}

/// Per-party slices of a contiguous run of triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleBatch {
    pub start: usize,
    pub parties: Vec<TripleShares>,
}

/// Dealer output with consumption tracking. Triples are handed out in
/// order and never twice.
#[derive(Debug, Clone)]
pub struct TriplePool {
    parties: Vec<TripleShares>,
    next: usize,
}

/// XOR-shares of `count` random `(a, b, a & b)` triples for `n_parties`.
pub fn deal_triples<R: Rng + ?Sized>(count: usize, n_parties: usize, rng: &mut R) -> Result<TriplePool, SharingError> {
    if n_parties < 2 {
        return Err(SharingError::Params(format!("{n_parties} parties, need at least 2")));
    }
    let a = BitBlock::random(count, rng);
    let b = BitBlock::random(count, rng);
    let c = a.and(&b).expect("equal lengths");
    let mut last = TripleShares { a, b, c };
    let mut parties = Vec::with_capacity(n_parties);
    for _ in 0..n_parties - 1 {
        let share = TripleShares {
            a: BitBlock::random(count, rng),
            b: BitBlock::random(count, rng),
            c: BitBlock::random(count, rng),
        };
        last.a ^= &share.a;
        last.b ^= &share.b;
        last.c ^= &share.c;
        parties.push(share);
    }
    parties.push(last);
    Ok(TriplePool { parties, next: 0 })
}

impl TriplePool {
    pub fn n_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn capacity(&self) -> usize {
        self.parties.first().map_or(0, |p| p.a.len())
    }

    pub fn remaining(&self) -> usize {
        self.capacity() - self.next
    }

    pub fn consumed(&self) -> usize {
        self.next
    }

    /// The next `k` unused triples.
    pub fn take(&mut self, k: usize) -> Result<TripleBatch, SharingError> {
        self.take_at(self.next, k)
    }

    /// Triples `start..start + k`; fails if any of them was handed out.
    pub fn take_at(&mut self, start: usize, k: usize) -> Result<TripleBatch, SharingError> {
        if start < self.next {
            return Err(SharingError::Reused { start });
        }
        if start + k > self.capacity() {
            return Err(SharingError::Exhausted {
                requested: k,
                available: self.capacity().saturating_sub(start),
            });
        }
        let parties = self
            .parties
            .iter()
            .map(|p| TripleShares {
                a: p.a.slice(start, k),
                b: p.b.slice(start, k),
                c: p.c.slice(start, k),
            })
            .collect();
        self.next = start + k;
        Ok(TripleBatch { start, parties })
    }
}
