//! Linear secret sharing over GF(2) and GF(2^61 - 1), and a trusted dealer
//! of Beaver triples.

pub mod field;
mod ntt;
mod triples;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::{toeplitz_apply_fast, BitBlock, BitMatrix, ToeplitzSeed};
pub use field::P;
pub use ntt::{toeplitz_gfp, toeplitz_gfp_naive};
pub use triples::{deal_triples, TripleBatch, TriplePool, TripleShares};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SharingError {
    #[error("invalid sharing parameters: {0}")]
    Params(String),
    #[error("need {need} shares to reconstruct, got {got}")]
    Threshold { need: usize, got: usize },
    #[error("inconsistent shares: {0}")]
    Consistency(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("triple supply exhausted: requested {requested}, {available} left")]
    Exhausted { requested: usize, available: usize },
    #[error("triples starting at {start} were already consumed")]
    Reused { start: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    AdditiveGf2,
    AdditiveGfp,
    /// Degree-`threshold` polynomials: `threshold + 1` shares reconstruct.
    Shamir { threshold: usize },
}

impl Scheme {
    pub fn is_binary(&self) -> bool {
        matches!(self, Scheme::AdditiveGf2)
    }

    /// Minimum number of shares that determine the secret.
    pub fn quorum(&self, n_parties: usize) -> usize {
        match *self {
            Scheme::Shamir { threshold } => threshold + 1,
            _ => n_parties,
        }
    }
}

/// Either packed bits or GF(p) elements, depending on the scheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShareData {
    Bits(BitBlock),
    Elems(Vec<u64>),
}

impl ShareData {
    pub fn len(&self) -> usize {
        match self {
            ShareData::Bits(b) => b.len(),
            ShareData::Elems(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bits as is; field elements reduced mod 2.
    pub fn to_bits(&self) -> BitBlock {
        match self {
            ShareData::Bits(b) => b.clone(),
            ShareData::Elems(v) => {
                let bools: Vec<bool> = v.iter().map(|x| x & 1 == 1).collect();
                BitBlock::from_bools(&bools)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareVector {
    pub party_id: usize,
    pub n_parties: usize,
    pub scheme: Scheme,
    pub values: ShareData,
}

impl ShareVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn validate(scheme: Scheme, n_parties: usize) -> Result<(), SharingError> {
    if n_parties < 2 {
        return Err(SharingError::Params(format!("{n_parties} parties, need at least 2")));
    }
    if let Scheme::Shamir { threshold } = scheme {
        if threshold == 0 || threshold >= n_parties {
            return Err(SharingError::Params(format!(
                "Shamir threshold {threshold} must lie in 1..{n_parties}"
            )));
        }
    }
    Ok(())
}

/// Splits `secret` among `n_parties`. Bit secrets are lifted to 0/1
/// elements for the prime-field schemes.
pub fn share<R: Rng + ?Sized>(
    secret: &ShareData,
    scheme: Scheme,
    n_parties: usize,
    rng: &mut R,
) -> Result<Vec<ShareVector>, SharingError> {
    validate(scheme, n_parties)?;
    let wrap = |party_id, values| ShareVector {
        party_id,
        n_parties,
        scheme,
        values,
    };
    match scheme {
        Scheme::AdditiveGf2 => {
            let ShareData::Bits(x) = secret else {
                return Err(SharingError::Params("GF(2) sharing takes a bit vector".into()));
            };
            let mut last = x.clone();
            let mut out = Vec::with_capacity(n_parties);
            for i in 0..n_parties - 1 {
                let r = BitBlock::random(x.len(), rng);
                last ^= &r;
                out.push(wrap(i, ShareData::Bits(r)));
            }
            out.push(wrap(n_parties - 1, ShareData::Bits(last)));
            Ok(out)
        }
        Scheme::AdditiveGfp => {
            let x = elems_of(secret)?;
            let mut last = x.clone();
            let mut out = Vec::with_capacity(n_parties);
            for i in 0..n_parties - 1 {
                let r: Vec<u64> = (0..x.len()).map(|_| rng.random_range(0..P)).collect();
                for (l, v) in last.iter_mut().zip(&r) {
                    *l = field::sub(*l, *v);
                }
                out.push(wrap(i, ShareData::Elems(r)));
            }
            out.push(wrap(n_parties - 1, ShareData::Elems(last)));
            Ok(out)
        }
        Scheme::Shamir { threshold } => {
            let x = elems_of(secret)?;
            let mut values = vec![x.clone(); n_parties];
            for k in 0..x.len() {
                let coeffs: Vec<u64> = (0..threshold).map(|_| rng.random_range(0..P)).collect();
                for (i, v) in values.iter_mut().enumerate() {
                    let point = i as u64 + 1;
                    // Horner on a_t x^t + ... + a_1 x, then add the secret
                    let mut acc = 0;
                    for &c in coeffs.iter().rev() {
                        acc = field::mul(field::add(acc, c), point);
                    }
                    v[k] = field::add(v[k], acc);
                }
            }
            Ok(values
                .into_iter()
                .enumerate()
                .map(|(i, v)| wrap(i, ShareData::Elems(v)))
                .collect())
        }
    }
}

fn elems_of(secret: &ShareData) -> Result<Vec<u64>, SharingError> {
    match secret {
        ShareData::Bits(b) => Ok(b.iter().map(u64::from).collect()),
        ShareData::Elems(v) => {
            if let Some(&bad) = v.iter().find(|&&x| x >= P) {
                return Err(SharingError::Params(format!("{bad} is not reduced mod p")));
            }
            Ok(v.clone())
        }
    }
}

/// Lagrange coefficients at zero for evaluation points `ids[k] + 1`.
fn lagrange_at_zero(ids: &[usize]) -> Vec<u64> {
    ids.iter()
        .map(|&i| {
            let xi = i as u64 + 1;
            let (mut num, mut den) = (1u64, 1u64);
            for &j in ids {
                if j != i {
                    let xj = j as u64 + 1;
                    num = field::mul(num, xj);
                    den = field::mul(den, field::sub(xj, xi));
                }
            }
            field::mul(num, field::inv(den))
        })
        .collect()
}

pub fn reconstruct(shares: &[ShareVector]) -> Result<ShareData, SharingError> {
    let first = shares.first().ok_or(SharingError::Threshold { need: 1, got: 0 })?;
    let (scheme, n_parties, len) = (first.scheme, first.n_parties, first.len());
    let mut seen = vec![false; n_parties];
    for s in shares {
        if s.scheme != scheme || s.n_parties != n_parties {
            return Err(SharingError::Consistency("mixed schemes".into()));
        }
        if s.len() != len {
            return Err(SharingError::Dimension {
                expected: len,
                actual: s.len(),
            });
        }
        if s.party_id >= n_parties {
            return Err(SharingError::Consistency(format!("party id {} out of range", s.party_id)));
        }
        if std::mem::replace(&mut seen[s.party_id], true) {
            return Err(SharingError::Consistency(format!("party {} appears twice", s.party_id)));
        }
        if scheme.is_binary() != matches!(s.values, ShareData::Bits(_)) {
            return Err(SharingError::Consistency("payload type does not match scheme".into()));
        }
    }
    let need = scheme.quorum(n_parties);
    if shares.len() < need {
        return Err(SharingError::Threshold {
            need,
            got: shares.len(),
        });
    }
    match scheme {
        Scheme::AdditiveGf2 => {
            let mut acc = BitBlock::zeros(len);
            for s in shares {
                if let ShareData::Bits(b) = &s.values {
                    acc ^= b;
                }
            }
            Ok(ShareData::Bits(acc))
        }
        Scheme::AdditiveGfp => {
            let mut acc = vec![0u64; len];
            for s in shares {
                if let ShareData::Elems(v) = &s.values {
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a = field::add(*a, *x);
                    }
                }
            }
            Ok(ShareData::Elems(acc))
        }
        Scheme::Shamir { .. } => {
            let used = &shares[..need];
            let ids: Vec<usize> = used.iter().map(|s| s.party_id).collect();
            let lambda = lagrange_at_zero(&ids);
            let mut acc = vec![0u64; len];
            for (s, &l) in used.iter().zip(&lambda) {
                if let ShareData::Elems(v) = &s.values {
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a = field::add(*a, field::mul(*x, l));
                    }
                }
            }
            Ok(ShareData::Elems(acc))
        }
    }
}

/// A public GF(2) matrix applied on the right: `y = x M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PublicMatrix {
    Dense(BitMatrix),
    Toeplitz(ToeplitzSeed),
}

impl PublicMatrix {
    pub fn input_len(&self) -> usize {
        match self {
            PublicMatrix::Dense(m) => m.n_rows(),
            PublicMatrix::Toeplitz(t) => t.n(),
        }
    }

    pub fn output_len(&self) -> usize {
        match self {
            PublicMatrix::Dense(m) => m.n_cols(),
            PublicMatrix::Toeplitz(t) => t.m(),
        }
    }
}

/// Applies a public linear map to one share; by linearity the results
/// reconstruct to `x M`.
pub fn lin_combine(share: &ShareVector, m: &PublicMatrix) -> Result<ShareVector, SharingError> {
    if share.len() != m.input_len() {
        return Err(SharingError::Dimension {
            expected: m.input_len(),
            actual: share.len(),
        });
    }
    let values = match (&share.values, m) {
        (ShareData::Bits(b), PublicMatrix::Dense(mat)) => {
            ShareData::Bits(mat.vec_mul(b).expect("length checked"))
        }
        (ShareData::Bits(b), PublicMatrix::Toeplitz(t)) => {
            ShareData::Bits(toeplitz_apply_fast(b, t).expect("length checked"))
        }
        (ShareData::Elems(v), PublicMatrix::Dense(mat)) => {
            let mut y = vec![0u64; mat.n_cols()];
            for (i, &x) in v.iter().enumerate() {
                for j in mat.row(i).iter_ones() {
                    y[j] = field::add(y[j], x);
                }
            }
            ShareData::Elems(y)
        }
        (ShareData::Elems(v), PublicMatrix::Toeplitz(t)) => ShareData::Elems(toeplitz_gfp(v, t)),
    };
    Ok(ShareVector {
        values,
        ..share.clone()
    })
}
