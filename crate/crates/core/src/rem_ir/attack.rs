//! Monte-Carlo eavesdropper simulations against reconciliation transcripts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    run_rem_ir, run_rr_encrypted, run_rr_offload, CodeRef, DecoderEndpoint, InProcessDecoder,
    IrOptions, MsgKind, SessionTranscript,
};
use crate::bitlinalg::BitBlock;
use crate::channel::rng::{substream, Stream};
use crate::channel::{raw_key, transmit, ChannelError, ChannelParams};
use crate::ldpc::{decode_syndrome, DecoderConfig};
use crate::otp::KeyStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub trials: usize,
    pub violations: usize,
}

/// Runs direct reconciliation for `trials` uniformly random `k_A` with the
/// error pattern fixed to `e_vec` and counts runs whose decoder-visible
/// messages differ from the first run's.
pub fn eve_dr_invariance<R: Rng + ?Sized>(
    e_vec: &BitBlock,
    code: &CodeRef,
    decoder: &dyn DecoderEndpoint,
    trials: usize,
    rng: &mut R,
) -> InvarianceReport {
    let mut reference: Option<Vec<BitBlock>> = None;
    let mut violations = 0;
    for t in 0..trials {
        let k_a = BitBlock::random(e_vec.len(), rng);
        let k_b = &k_a ^ e_vec;
        let transcript = match run_rem_ir(&k_a, &k_b, code, &IrOptions::default(), decoder, t as u64) {
            Ok(out) => out.transcript,
            Err(abort) => abort.transcript,
        };
        let view: Vec<BitBlock> = transcript.decoder_view().into_iter().map(|m| m.body.clone()).collect();
        match &reference {
            None => reference = Some(view),
            Some(r) if *r != view => violations += 1,
            Some(_) => {}
        }
    }
    InvarianceReport { trials, violations }
}

/// Which transcript Eve attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackTarget {
    /// Reverse reconciliation, `s_B` and `s_e` both public.
    RrPlain,
    /// Reverse reconciliation with `s_B` one-time-pad encrypted; Eve uses the
    /// ciphertext where she would use `s_B`.
    RrEncrypted,
    /// Direct reconciliation; Eve decodes her key against the public `s_A`.
    DrControl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackStats {
    pub target: AttackTarget,
    pub e: f64,
    pub d: f64,
    pub trials: usize,
    /// Runs where Alice and Bob ended up with a verified key.
    pub honest_success: usize,
    /// Runs where Eve's estimate equals that key exactly.
    pub recovered: usize,
    pub rate: f64,
    /// Mean fraction of key bits Eve gets wrong, over successful runs.
    pub residual_ber: f64,
    /// Runs where Eve's raw `k_E` already equals the key.
    pub baseline: usize,
}

/// Eve's estimate of the syndrome `k_A Hᵀ` from a transcript.
fn eve_s_a(t: &SessionTranscript, target: AttackTarget) -> Option<BitBlock> {
    match target {
        AttackTarget::DrControl => t.find(MsgKind::SyndromeA).cloned(),
        AttackTarget::RrPlain | AttackTarget::RrEncrypted => {
            let s_b = t.find(MsgKind::SyndromeB)?;
            let s_e = t.find(MsgKind::ErrorSyndrome)?;
            Some(s_b ^ s_e)
        }
    }
}

/// Simulates `trials` sessions over the channel `p` and lets Eve, holding
/// `k_E`, decode `k_A` from `s_A ⊕ k_E Hᵀ` with `eve_cfg`. In reverse
/// reconciliation she then adds the public `ê` to reach `k_B`. The honest
/// decoder is sum-product with prior `p.e`.
pub fn eve_attack(
    p: &ChannelParams,
    code: &CodeRef,
    eve_cfg: &DecoderConfig,
    trials: usize,
    target: AttackTarget,
) -> Result<AttackStats, ChannelError> {
    p.validate()?;
    let n = code.h.n();
    let honest = InProcessDecoder::for_code(code, DecoderConfig::sum_product(p.e.max(1e-3)));
    let opts = IrOptions::default();
    let mut stats = AttackStats {
        target,
        e: p.e,
        d: p.d,
        trials,
        honest_success: 0,
        recovered: 0,
        rate: 0.0,
        residual_ber: 0.0,
        baseline: 0,
    };
    let mut ber_sum = 0.0;
    for t in 0..trials as u64 {
        let k_a = raw_key(n, p.seed, t);
        let ch = transmit(&k_a, p, t)?;
        let run = match target {
            AttackTarget::DrControl => run_rem_ir(&k_a, &ch.k_b, code, &opts, &honest, t),
            AttackTarget::RrPlain => run_rr_offload(&k_a, &ch.k_b, code, &opts, &honest, t),
            AttackTarget::RrEncrypted => {
                let mut ks = KeyStore::random(code.h.r(), &mut substream(p.seed, Stream::KeyStore, t));
                run_rr_encrypted(&k_a, &ch.k_b, code, &opts, &honest, &mut ks, (p.e, p.d), t).map(|o| o.ir)
            }
        };
        let Ok(out) = run else { continue };
        stats.honest_success += 1;
        // the shared key: k_A in direct, k_B in reverse reconciliation
        let key = if target == AttackTarget::DrControl { &k_a } else { &ch.k_b };
        if ch.k_e == *key {
            stats.baseline += 1;
        }
        let s_a = eve_s_a(&out.transcript, target).expect("transcript carries the syndromes");
        let s_f = &s_a ^ &code.h.syndrome(&ch.k_e).expect("length checked");
        let f_hat = decode_syndrome(&s_f, &code.h, eve_cfg)
            .map(|r| r.e_hat)
            .unwrap_or_else(|_| BitBlock::zeros(n));
        let k_a_hat = &ch.k_e ^ &f_hat;
        let guess = match target {
            AttackTarget::DrControl => k_a_hat,
            _ => &k_a_hat ^ out.transcript.find(MsgKind::ErrorVector).expect("ê is public"),
        };
        let wrong = (&guess ^ key).weight();
        if wrong == 0 {
            stats.recovered += 1;
        }
        ber_sum += wrong as f64 / n as f64;
    }
    if trials > 0 {
        stats.rate = stats.recovered as f64 / trials as f64;
    }
    if stats.honest_success > 0 {
        stats.residual_ber = ber_sum / stats.honest_success as f64;
    }
    Ok(stats)
}

/// `eve_attack` against plain reverse-reconciliation offloading, with Eve
/// decoding by sum-product at prior `max(d, 1e-3)`.
pub fn eve_rr_attack(p: &ChannelParams, code: &CodeRef, trials: usize) -> Result<AttackStats, ChannelError> {
    eve_attack(p, code, &DecoderConfig::sum_product(p.d.max(1e-3)), trials, AttackTarget::RrPlain)
}
