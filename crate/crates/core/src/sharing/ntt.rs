//! Exact integer correlation of a GF(p) vector with a 0/1 Toeplitz seed,
//! via number-theoretic transforms over the prime `Q = 2^64 - 2^32 + 1`.
//!
//! Elements are split into three 21-bit limbs so every limb sum stays far
//! below `Q` (at most `2^21 * len`), making each limb product exact.

use super::field;
use crate::bitlinalg::ToeplitzSeed;

const Q: u64 = 0xFFFF_FFFF_0000_0001;
const GENERATOR: u64 = 7;
const LIMB: u32 = 21;
const NAIVE_WORK: usize = 1 << 16;

#[inline]
fn q_reduce(x: u128) -> u64 {
    // 2^64 ≡ 2^32 - 1 and 2^96 ≡ -1 (mod Q)
    let lo = x as u64;
    let hi = (x >> 64) as u64;
    let hi_lo = hi & 0xFFFF_FFFF;
    let hi_hi = hi >> 32;
    let (mut t, borrow) = lo.overflowing_sub(hi_hi);
    if borrow {
        t = t.wrapping_sub(0xFFFF_FFFF);
    }
    let (mut r, carry) = t.overflowing_add(hi_lo * 0xFFFF_FFFF);
    if carry || r >= Q {
        r = r.wrapping_sub(Q);
    }
    r
}

#[inline]
fn q_mul(a: u64, b: u64) -> u64 {
    q_reduce(a as u128 * b as u128)
}

#[inline]
fn q_add(a: u64, b: u64) -> u64 {
    let (s, c) = a.overflowing_add(b);
    if c || s >= Q {
        s.wrapping_sub(Q)
    } else {
        s
    }
}

#[inline]
fn q_sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a.wrapping_sub(b).wrapping_add(Q)
    }
}

fn q_pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = q_mul(r, a);
        }
        a = q_mul(a, a);
        e >>= 1;
    }
    r
}

fn ntt(a: &mut [u64], invert: bool) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = q_pow(GENERATOR, (Q - 1) / len as u64);
        if invert {
            w = q_pow(w, Q - 2);
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut t = 1;
        for _ in 0..half {
            twiddles.push(t);
            t = q_mul(t, w);
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for k in 0..half {
                let u = lo[k];
                let v = q_mul(hi[k], twiddles[k]);
                lo[k] = q_add(u, v);
                hi[k] = q_sub(u, v);
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = q_pow(n as u64, Q - 2);
        for x in a.iter_mut() {
            *x = q_mul(*x, n_inv);
        }
    }
}

/// `y[j] = Σ_i x[i] T[i][j] mod p` for a GF(p) vector `x` of length `n`.
pub fn toeplitz_gfp(x: &[u64], t: &ToeplitzSeed) -> Vec<u64> {
    let (n, m) = (t.n(), t.m());
    debug_assert_eq!(x.len(), n);
    if n * m <= NAIVE_WORK {
        toeplitz_gfp_naive(x, t)
    } else {
        toeplitz_gfp_transform(x, t)
    }
}

fn toeplitz_gfp_transform(x: &[u64], t: &ToeplitzSeed) -> Vec<u64> {
    let (n, m) = (t.n(), t.m());
    // y[j] = Σ_i x[i] r[n-1+j-i] with r the reversed seed: coefficient
    // n-1+j of the linear convolution x * r
    let seed_len = n + m - 1;
    let size = (n + seed_len - 1).next_power_of_two();
    let mut r = vec![0u64; size];
    for (k, slot) in r.iter_mut().take(seed_len).enumerate() {
        *slot = t.bits().get(seed_len - 1 - k) as u64;
    }
    ntt(&mut r, false);
    let mut y = vec![0u64; m];
    for limb in 0..3 {
        let shift = LIMB * limb;
        let mut a = vec![0u64; size];
        for (dst, &v) in a.iter_mut().zip(x) {
            *dst = (v >> shift) & ((1 << LIMB) - 1);
        }
        ntt(&mut a, false);
        for (ai, ri) in a.iter_mut().zip(&r) {
            *ai = q_mul(*ai, *ri);
        }
        ntt(&mut a, true);
        let scale = field::pow(2, shift as u64);
        for (j, yj) in y.iter_mut().enumerate() {
            let part = a[n - 1 + j] % field::P;
            *yj = field::add(*yj, field::mul(part, scale));
        }
    }
    y
}

pub fn toeplitz_gfp_naive(x: &[u64], t: &ToeplitzSeed) -> Vec<u64> {
    (0..t.m())
        .map(|j| {
            x.iter()
                .enumerate()
                .filter(|&(i, _)| t.entry(i, j))
                .fold(0, |acc, (_, &v)| field::add(acc, v))
        })
        .collect()
}
