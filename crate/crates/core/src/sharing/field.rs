//! Arithmetic in GF(p), p = 2^61 - 1.

pub const P: u64 = (1 << 61) - 1;

/// Reduces `x < 2^122`, which covers any product of two reduced elements.
#[inline]
pub fn reduce128(x: u128) -> u64 {
    // 2^61 ≡ 1
    let lo = (x as u64) & P;
    let hi = (x >> 61) as u64;
    let lo2 = (hi & P) + (hi >> 61) + lo;
    let r = (lo2 & P) + (lo2 >> 61);
    if r >= P {
        r - P
    } else {
        r
    }
}

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P - b
    }
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    reduce128(a as u128 * b as u128)
}

pub fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

/// Inverse of a non-zero element.
pub fn inv(a: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(P));
    pow(a, P - 2)
}
