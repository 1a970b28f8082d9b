//! Carry-less (GF(2)[x]) polynomial multiplication on packed words.
//!
//! Coefficient `i` is bit `i % 64` of word `i / 64`. Karatsuba recursion on
//! top of a 64x64 carry-less base product.

const SCHOOLBOOK_WORDS: usize = 24;

#[inline]
fn clmul_portable(a: u64, b: u64) -> u128 {
    let mut table = [0u128; 16];
    let a = a as u128;
    for i in 1..16usize {
        table[i] = if i & 1 == 1 {
            table[i - 1] ^ a
        } else {
            table[i >> 1] << 1
        };
    }
    let mut r = 0u128;
    for shift in (0..16).rev() {
        r = (r << 4) ^ table[((b >> (4 * shift)) & 0xf) as usize];
    }
    r
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "pclmulqdq,sse2")]
unsafe fn clmul_x86(a: u64, b: u64) -> u128 {
    use std::arch::x86_64::{_mm_clmulepi64_si128, _mm_cvtsi128_si64, _mm_set_epi64x, _mm_unpackhi_epi64};
    let va = _mm_set_epi64x(0, a as i64);
    let vb = _mm_set_epi64x(0, b as i64);
    let p = _mm_clmulepi64_si128(va, vb, 0);
    let lo = _mm_cvtsi128_si64(p) as u64;
    let hi = _mm_cvtsi128_si64(_mm_unpackhi_epi64(p, p)) as u64;
    ((hi as u128) << 64) | lo as u128
}

#[inline]
fn has_pclmul() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        std::arch::is_x86_feature_detected!("pclmulqdq")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

/// 64x64 -> 128 bit carry-less product.
#[inline]
pub fn clmul64(a: u64, b: u64) -> u128 {
    #[cfg(target_arch = "x86_64")]
    {
        if has_pclmul() {
            // SAFETY: the required CPU feature was detected at runtime.
            return unsafe { clmul_x86(a, b) };
        }
    }
    clmul_portable(a, b)
}

fn schoolbook(a: &[u64], b: &[u64], out: &mut [u64]) {
    let fast = has_pclmul();
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let p = if fast {
                #[cfg(target_arch = "x86_64")]
                {
                    // SAFETY: checked by has_pclmul above.
                    unsafe { clmul_x86(x, y) }
                }
                #[cfg(not(target_arch = "x86_64"))]
                {
                    clmul_portable(x, y)
                }
            } else {
                clmul_portable(x, y)
            };
            out[i + j] ^= p as u64;
            out[i + j + 1] ^= (p >> 64) as u64;
        }
    }
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Accumulates `a * b` into `out` (`out.len() >= a.len() + b.len()`).
fn mul_acc(a: &[u64], b: &[u64], out: &mut [u64]) {
    let (a, b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if b.is_empty() {
        return;
    }
    if b.len() <= SCHOOLBOOK_WORDS {
        schoolbook(a, b, out);
        return;
    }
    if a.len() >= 2 * b.len() {
        // unbalanced: slice the long operand into pieces of the short length
        for (k, chunk) in a.chunks(b.len()).enumerate() {
            let off = k * b.len();
            mul_acc(chunk, b, &mut out[off..]);
        }
        return;
    }
    let h = a.len().div_ceil(2);
    let (a0, a1) = a.split_at(h);
    let (b0, b1) = b.split_at(h.min(b.len()));

    let mut z0 = vec![0u64; a0.len() + b0.len()];
    mul_acc(a0, b0, &mut z0);
    let mut z2 = vec![0u64; a1.len() + b1.len()];
    mul_acc(a1, b1, &mut z2);

    let mut sa = a0.to_vec();
    xor_into(&mut sa, a1);
    let mut sb = b0.to_vec();
    xor_into(&mut sb, b1);
    let mut z1 = vec![0u64; sa.len() + sb.len()];
    mul_acc(&sa, &sb, &mut z1);
    xor_into(&mut z1, &z0);
    xor_into(&mut z1, &z2);

    xor_into(out, &z0);
    xor_into(&mut out[h..], &z1);
    xor_into(&mut out[2 * h..], &z2);
}

/// Full product of two packed GF(2) polynomials; `a.len() + b.len()` words.
pub fn poly_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len()];
    mul_acc(a, b, &mut out);
    out
}
