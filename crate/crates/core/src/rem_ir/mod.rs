//! Information reconciliation with the syndrome decoding handed to an
//! untrusted third party, plus reverse-reconciliation sessions used by the
//! attack demonstrations.
//!
//! Direct reconciliation (Bob corrects towards Alice):
//!
//! ```text
//! Alice -> Bob      s_A = k_A Hᵀ
//! Bob   -> Decoder  s_e = s_A ⊕ s_B
//! Decoder -> Bob    ê
//! Bob               check ê Hᵀ = s_e (and the weight bound), k̂_A = k_B ⊕ ê
//! ```

pub mod attack;
mod endpoint;
mod remote;

use serde::{Deserialize, Serialize};

use crate::bitlinalg::BitBlock;
use crate::channel::{h2, LeakageLedger, Party};
use crate::keyrate::composite_rate;
use crate::ldpc::{decode_syndrome, verify_error_vector, DecoderConfig, Verdict};
use crate::otp::{KeyStore, OtpExhausted};
pub use endpoint::{
    CodeRef, CodeRegistry, DecodeReply, DecoderEndpoint, EndpointError, FanOut, InProcessDecoder,
    RegistryError, Tamper, TamperingDecoder,
};
pub use remote::RemoteDecoder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsgKind {
    SyndromeA,
    ErrorSyndrome,
    ErrorVector,
    SyndromeB,
    Abort,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrMessage {
    pub kind: MsgKind,
    pub body: BitBlock,
    pub session: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Public,
    /// One-time-pad protected; the body is the ciphertext.
    Private,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub sender: Party,
    pub receiver: Party,
    pub link: Link,
    pub message: IrMessage,
}

/// Everything sent during one reconciliation session, in order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub session: u64,
    pub entries: Vec<TranscriptEntry>,
    pub ledger: LeakageLedger,
}

impl SessionTranscript {
    pub fn new(session: u64) -> Self {
        SessionTranscript {
            session,
            ..Default::default()
        }
    }

    /// Appends a message. Public messages go into the ledger; `counts`
    /// says whether they tell an eavesdropper anything about the key.
    fn send(&mut self, from: Party, to: Party, link: Link, kind: MsgKind, body: BitBlock, counts: bool) {
        if link == Link::Public {
            let label = format!("{kind:?}");
            if counts {
                self.ledger.record(label, body.len(), from, to);
            } else {
                self.ledger.record_neutral(label, body.len(), from, to);
            }
        }
        self.entries.push(TranscriptEntry {
            sender: from,
            receiver: to,
            link,
            message: IrMessage {
                kind,
                body,
                session: self.session,
            },
        });
    }

    /// Body of the first message of `kind`.
    pub fn find(&self, kind: MsgKind) -> Option<&BitBlock> {
        self.entries
            .iter()
            .find(|e| e.message.kind == kind)
            .map(|e| &e.message.body)
    }

    /// Messages the third-party decoder sends or receives.
    pub fn decoder_view(&self) -> Vec<&IrMessage> {
        self.entries
            .iter()
            .filter(|e| e.sender == Party::Decoder || e.receiver == Party::Decoder)
            .map(|e| &e.message)
            .collect()
    }

    /// Sum of public message lengths; equals `ledger.total()`.
    pub fn public_bits(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.link == Link::Public)
            .map(|e| e.message.body.len())
            .sum()
    }
}

/// Checks applied to a decoder's answer before it is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrOptions {
    /// Recompute `ê Hᵀ` and compare with `s_e`. Disable only to benchmark.
    pub verify: bool,
    pub weight_bound: Option<usize>,
}

impl Default for IrOptions {
    fn default() -> Self {
        IrOptions {
            verify: true,
            weight_bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum AbortCause {
    #[error("key lengths {k_a}/{k_b} do not match code length {n}")]
    Dimension { k_a: usize, k_b: usize, n: usize },
    #[error("decoder endpoint failed: {0}")]
    Endpoint(String),
    #[error("decoder did not converge")]
    NotConverged,
    #[error("decoder output rejected: {0:?}")]
    Rejected(Verdict),
    #[error("one-time pad: {0}")]
    Otp(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("reconciliation aborted: {cause}")]
pub struct IrAbort {
    pub cause: AbortCause,
    pub transcript: SessionTranscript,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrOutcome {
    /// The corrected key: Bob's estimate of `k_A` (direct) or Alice's
    /// estimate of `k_B` (reverse).
    pub key: BitBlock,
    pub e_hat: BitBlock,
    pub decoder_iterations: u32,
    pub transcript: SessionTranscript,
}

fn check_lengths(k_a: &BitBlock, k_b: &BitBlock, code: &CodeRef) -> Result<(), AbortCause> {
    let n = code.h.n();
    if k_a.len() != n || k_b.len() != n {
        return Err(AbortCause::Dimension {
            k_a: k_a.len(),
            k_b: k_b.len(),
            n,
        });
    }
    Ok(())
}

fn abort(mut transcript: SessionTranscript, from: Party, to: Party, cause: AbortCause) -> IrAbort {
    transcript.send(from, to, Link::Public, MsgKind::Abort, BitBlock::zeros(0), false);
    IrAbort { cause, transcript }
}

/// Verifies a decoder answer and returns `ê`, or the abort cause.
fn accept(
    reply: Result<DecodeReply, EndpointError>,
    s_e: &BitBlock,
    code: &CodeRef,
    opts: &IrOptions,
) -> Result<DecodeReply, AbortCause> {
    let reply = reply.map_err(|e| AbortCause::Endpoint(e.to_string()))?;
    if reply.e_hat.len() != code.h.n() {
        return Err(AbortCause::Rejected(Verdict::SyndromeMismatch));
    }
    if !reply.converged {
        return Err(AbortCause::NotConverged);
    }
    if opts.verify {
        match verify_error_vector(&reply.e_hat, s_e, &code.h, opts.weight_bound) {
            Verdict::Accept => {}
            v => return Err(AbortCause::Rejected(v)),
        }
    }
    Ok(reply)
}

fn syndrome(code: &CodeRef, k: &BitBlock) -> BitBlock {
    code.h.syndrome(k).expect("length checked")
}

/// Direct reconciliation with an offloaded decoder.
pub fn run_rem_ir(
    k_a: &BitBlock,
    k_b: &BitBlock,
    code: &CodeRef,
    opts: &IrOptions,
    decoder: &dyn DecoderEndpoint,
    session: u64,
) -> Result<IrOutcome, IrAbort> {
    let mut t = SessionTranscript::new(session);
    if let Err(cause) = check_lengths(k_a, k_b, code) {
        return Err(IrAbort { cause, transcript: t });
    }
    let s_a = syndrome(code, k_a);
    t.send(Party::Alice, Party::Bob, Link::Public, MsgKind::SyndromeA, s_a.clone(), true);
    let s_e = &s_a ^ &syndrome(code, k_b);
    t.send(Party::Bob, Party::Decoder, Link::Public, MsgKind::ErrorSyndrome, s_e.clone(), false);
    let reply = decoder.decode(code, &s_e);
    if let Ok(r) = &reply {
        t.send(Party::Decoder, Party::Bob, Link::Public, MsgKind::ErrorVector, r.e_hat.clone(), false);
    }
    match accept(reply, &s_e, code, opts) {
        Ok(r) => Ok(IrOutcome {
            key: k_b ^ &r.e_hat,
            e_hat: r.e_hat,
            decoder_iterations: r.iterations,
            transcript: t,
        }),
        Err(cause) => Err(abort(t, Party::Bob, Party::Alice, cause)),
    }
}

/// Both peers send their syndromes straight to the decoder, which forms
/// `s_e` itself. Bob still verifies against `s_A ⊕ s_B`.
pub fn run_rem_ir_variant(
    k_a: &BitBlock,
    k_b: &BitBlock,
    code: &CodeRef,
    opts: &IrOptions,
    decoder: &dyn DecoderEndpoint,
    session: u64,
) -> Result<IrOutcome, IrAbort> {
    let mut t = SessionTranscript::new(session);
    if let Err(cause) = check_lengths(k_a, k_b, code) {
        return Err(IrAbort { cause, transcript: t });
    }
    let s_a = syndrome(code, k_a);
    let s_b = syndrome(code, k_b);
    t.send(Party::Alice, Party::Decoder, Link::Public, MsgKind::SyndromeA, s_a.clone(), true);
    // given s_A, s_B only adds e Hᵀ
    t.send(Party::Bob, Party::Decoder, Link::Public, MsgKind::SyndromeB, s_b.clone(), false);
    let reply = decoder.decode_pair(code, &s_a, &s_b);
    if let Ok(r) = &reply {
        t.send(Party::Decoder, Party::Bob, Link::Public, MsgKind::ErrorVector, r.e_hat.clone(), false);
    }
    let s_e = &s_a ^ &s_b;
    match accept(reply, &s_e, code, opts) {
        Ok(r) => Ok(IrOutcome {
            key: k_b ^ &r.e_hat,
            e_hat: r.e_hat,
            decoder_iterations: r.iterations,
            transcript: t,
        }),
        Err(cause) => Err(abort(t, Party::Bob, Party::Alice, cause)),
    }
}

/// Direct reconciliation without offloading: Bob decodes himself.
pub fn run_local_ir(
    k_a: &BitBlock,
    k_b: &BitBlock,
    code: &CodeRef,
    cfg: &DecoderConfig,
    session: u64,
) -> Result<IrOutcome, IrAbort> {
    let mut t = SessionTranscript::new(session);
    if let Err(cause) = check_lengths(k_a, k_b, code) {
        return Err(IrAbort { cause, transcript: t });
    }
    let s_a = syndrome(code, k_a);
    t.send(Party::Alice, Party::Bob, Link::Public, MsgKind::SyndromeA, s_a.clone(), true);
    let s_e = &s_a ^ &syndrome(code, k_b);
    let reply = decode_syndrome(&s_e, &code.h, cfg)
        .map(|r| DecodeReply {
            e_hat: r.e_hat,
            converged: r.converged,
            iterations: r.iterations,
        })
        .map_err(EndpointError::from);
    let opts = IrOptions {
        verify: true,
        weight_bound: None,
    };
    match accept(reply, &s_e, code, &opts) {
        Ok(r) => Ok(IrOutcome {
            key: k_b ^ &r.e_hat,
            e_hat: r.e_hat,
            decoder_iterations: r.iterations,
            transcript: t,
        }),
        Err(cause) => Err(abort(t, Party::Bob, Party::Alice, cause)),
    }
}

/// Reverse reconciliation with `s_B` sent in the clear and decoding
/// offloaded. Insecure by construction; exists to be attacked.
pub fn run_rr_offload(
    k_a: &BitBlock,
    k_b: &BitBlock,
    code: &CodeRef,
    opts: &IrOptions,
    decoder: &dyn DecoderEndpoint,
    session: u64,
) -> Result<IrOutcome, IrAbort> {
    let mut t = SessionTranscript::new(session);
    if let Err(cause) = check_lengths(k_a, k_b, code) {
        return Err(IrAbort { cause, transcript: t });
    }
    let s_b = syndrome(code, k_b);
    t.send(Party::Bob, Party::Alice, Link::Public, MsgKind::SyndromeB, s_b.clone(), true);
    let s_e = &s_b ^ &syndrome(code, k_a);
    t.send(Party::Alice, Party::Decoder, Link::Public, MsgKind::ErrorSyndrome, s_e.clone(), false);
    rr_finish(t, k_a, &s_e, code, opts, decoder)
}

fn rr_finish(
    mut t: SessionTranscript,
    k_a: &BitBlock,
    s_e: &BitBlock,
    code: &CodeRef,
    opts: &IrOptions,
    decoder: &dyn DecoderEndpoint,
) -> Result<IrOutcome, IrAbort> {
    let reply = decoder.decode(code, s_e);
    if let Ok(r) = &reply {
        t.send(Party::Decoder, Party::Alice, Link::Public, MsgKind::ErrorVector, r.e_hat.clone(), false);
    }
    match accept(reply, s_e, code, opts) {
        Ok(r) => Ok(IrOutcome {
            key: k_a ^ &r.e_hat,
            e_hat: r.e_hat,
            decoder_iterations: r.iterations,
            transcript: t,
        }),
        Err(cause) => Err(abort(t, Party::Alice, Party::Bob, cause)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrEncryptedOutcome {
    pub ir: IrOutcome,
    pub otp_consumed: usize,
    /// `n H_b(e + d - 2ed) - |s_e| - OTP bits`: what reverse reconciliation
    /// could still distil after paying for the disclosure and the pad.
    pub key_balance: f64,
}

/// Reverse reconciliation with `s_B` one-time-pad encrypted on its way to
/// Alice, who then offloads the decoding of `s_e`. `e` and `d` are the
/// Bob and Eve crossover rates used for the key balance.
#[allow(clippy::too_many_arguments)]
pub fn run_rr_encrypted(
    k_a: &BitBlock,
    k_b: &BitBlock,
    code: &CodeRef,
    opts: &IrOptions,
    decoder: &dyn DecoderEndpoint,
    key_store: &mut KeyStore,
    (e, d): (f64, f64),
    session: u64,
) -> Result<RrEncryptedOutcome, IrAbort> {
    let mut t = SessionTranscript::new(session);
    if let Err(cause) = check_lengths(k_a, k_b, code) {
        return Err(IrAbort { cause, transcript: t });
    }
    let s_b = syndrome(code, k_b);
    let pad = match key_store.consume(s_b.len()) {
        Ok(p) => p,
        Err(OtpExhausted { requested, available }) => {
            let cause = AbortCause::Otp(format!("need {requested} bits, {available} left"));
            return Err(abort(t, Party::Bob, Party::Alice, cause));
        }
    };
    let cipher = &s_b ^ &pad;
    t.send(Party::Bob, Party::Alice, Link::Private, MsgKind::SyndromeB, cipher.clone(), false);
    let s_b_dec = &cipher ^ &pad;
    let s_e = &s_b_dec ^ &syndrome(code, k_a);
    // with s_B hidden, s_e is the only syndrome information Eve sees
    t.send(Party::Alice, Party::Decoder, Link::Public, MsgKind::ErrorSyndrome, s_e.clone(), true);
    let ir = rr_finish(t, k_a, &s_e, code, opts, decoder)?;
    let n = code.h.n() as f64;
    let key_balance = n * h2(composite_rate(e, d)) - s_e.len() as f64 - pad.len() as f64;
    Ok(RrEncryptedOutcome {
        ir,
        otp_consumed: pad.len(),
        key_balance,
    })
}
