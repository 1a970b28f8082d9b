//! Key confirmation: Alice sends a short universal hash of her key, Bob
//! compares it with the hash of his.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PaError;
use crate::bitlinalg::{toeplitz_apply_fast, BitBlock, ToeplitzSeed};
use crate::channel::{LeakageLedger, Party};
use crate::otp::KeyStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfirmPlacement {
    /// On the final key, tag one-time-pad encrypted.
    AfterPa,
    /// On the reconciled key, tag in the clear and charged to the ledger.
    BeforePa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfirmVerdict {
    Accept,
    Reject,
}

/// What Alice sends: the hash selector and the (possibly encrypted) tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfirmTag {
    pub tag: BitBlock,
    pub hash_seed: ToeplitzSeed,
    pub encrypted: bool,
}

/// Keys shorter than the tag are zero-extended; the extension is injective
/// so the hash family stays universal.
fn hash(k: &BitBlock, seed: &ToeplitzSeed) -> Result<BitBlock, PaError> {
    let input = if k.len() < seed.n() {
        BitBlock::concat(&[k, &BitBlock::zeros(seed.n() - k.len())])
    } else {
        k.clone()
    };
    toeplitz_apply_fast(&input, seed).map_err(|_| PaError::Dimension {
        expected: seed.n(),
        actual: k.len(),
    })
}

/// Alice's side. `pad`, if given, must be `tag_len` bits.
pub fn make_tag<R: Rng + ?Sized>(
    k_a: &BitBlock,
    tag_len: usize,
    pad: Option<&BitBlock>,
    rng: &mut R,
) -> Result<ConfirmTag, PaError> {
    if tag_len == 0 {
        return Err(PaError::Plan("tag length must be at least 1".into()));
    }
    let seed = ToeplitzSeed::random(k_a.len().max(tag_len), tag_len, rng).map_err(|e| PaError::Plan(e.to_string()))?;
    let mut tag = hash(k_a, &seed)?;
    if let Some(p) = pad {
        tag = tag.xor(p).map_err(|_| PaError::Dimension {
            expected: tag_len,
            actual: p.len(),
        })?;
    }
    Ok(ConfirmTag {
        tag,
        hash_seed: seed,
        encrypted: pad.is_some(),
    })
}

/// Bob's side: decrypt with the same pad and compare.
pub fn check_tag(k_b: &BitBlock, t: &ConfirmTag, pad: Option<&BitBlock>) -> ConfirmVerdict {
    if t.encrypted != pad.is_some() || k_b.len() > t.hash_seed.n() {
        return ConfirmVerdict::Reject;
    }
    let received = match pad {
        Some(p) => match t.tag.xor(p) {
            Ok(x) => x,
            Err(_) => return ConfirmVerdict::Reject,
        },
        None => t.tag.clone(),
    };
    match hash(k_b, &t.hash_seed) {
        Ok(h) if h == received => ConfirmVerdict::Accept,
        _ => ConfirmVerdict::Reject,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfirmOutcome {
    pub verdict: ConfirmVerdict,
    pub tag: ConfirmTag,
    pub otp_consumed: usize,
}

/// One confirmation exchange. After PA the tag is encrypted with `tag_len`
/// pad bits from `otp`; before PA it is sent in the clear and recorded in
/// `ledger`. The hash selector is public but independent of the key.
pub fn confirm<R: Rng + ?Sized>(
    k_a: &BitBlock,
    k_b: &BitBlock,
    tag_len: usize,
    placement: ConfirmPlacement,
    otp: Option<&mut KeyStore>,
    ledger: &mut LeakageLedger,
    rng: &mut R,
) -> Result<ConfirmOutcome, PaError> {
    let pad = match placement {
        ConfirmPlacement::AfterPa => {
            let store = otp.ok_or_else(|| PaError::Plan("confirmation after PA needs one-time-pad material".into()))?;
            Some(store.consume(tag_len)?)
        }
        ConfirmPlacement::BeforePa => None,
    };
    let tag = make_tag(k_a, tag_len, pad.as_ref(), rng)?;
    ledger.record_neutral("confirm_seed", tag.hash_seed.bits().len(), Party::Alice, Party::Bob);
    if placement == ConfirmPlacement::BeforePa {
        ledger.record("confirm_tag", tag_len, Party::Alice, Party::Bob);
    }
    let verdict = check_tag(k_b, &tag, pad.as_ref());
    Ok(ConfirmOutcome {
        verdict,
        tag,
        otp_consumed: pad.map_or(0, |p| p.len()),
    })
}
