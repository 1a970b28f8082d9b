//! End-to-end runs: error estimation, reconciliation, privacy
//! amplification and confirmation per block, driven by a scenario file.

mod output;
mod scenario;

use std::io;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::bitlinalg::BitBlock;
use crate::channel::rng::{substream, Stream};
use crate::channel::{estimate_qber, raw_key, transmit, LeakageLedger};
use crate::keyrate::pa_output_length;
use crate::ldpc::weight_bound;
use crate::otp::KeyStore;
use crate::rem_ir::{
    run_local_ir, run_rem_ir, run_rem_ir_variant, run_rr_encrypted, CodeRef, DecoderEndpoint, InProcessDecoder,
    IrOptions, RemoteDecoder,
};
use crate::rem_pa::{
    confirm, pa_local, run_rem_pa, ConfirmPlacement, ConfirmVerdict, LocalPaServer, PaPlan, PaServer, RemotePaServer,
};
pub use output::{emit_curves, emit_mpc_table, write_outputs, BLOCKS_HEADER};
pub use scenario::{ChannelSpec, CodeSpec, KeyStoreSpec, OffloadMode, PaMode, Scenario, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Other(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockStatus {
    /// Keys agreed and confirmed.
    Ok,
    /// Reconciliation aborted.
    IrAbort,
    /// Confirmation tags differed.
    ConfirmReject,
    /// Nothing left after privacy amplification.
    NoKey,
    /// PA servers failed or the pad ran out.
    PaError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockOutcome {
    pub block: u64,
    pub status: BlockStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub qber_estimate: f64,
    pub decoder_iterations: u32,
    /// All bits sent in the clear.
    pub public_bits: usize,
    /// Public bits charged against the key.
    pub leaked_bits: usize,
    pub pa_len: usize,
    pub final_bits: usize,
    /// Pad spent on encrypting Bob's syndrome.
    pub otp_consumed: usize,
    /// Pad spent on encrypting the confirmation tag.
    pub tag_pad_bits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key_balance: Option<f64>,
    /// Confirmed but different keys; only visible in simulation.
    pub undetected_error: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_key: Option<BitBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub name: String,
    pub seed: u64,
    pub mode: OffloadMode,
    pub n: usize,
    pub blocks: Vec<BlockOutcome>,
    /// Fraction of blocks that did not end with a confirmed key.
    pub fer: f64,
    pub mean_qber: f64,
    pub public_bits: usize,
    pub leaked_bits: usize,
    pub final_bits: usize,
    pub otp_consumed: usize,
    pub tag_pad_bits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key_balance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunReport {
    /// Serialization without the timing field: identical for identical
    /// seeds.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.timing = None;
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}

/// One-sided Clopper-Pearson upper bound on the error rate after `errors`
/// mismatches in `sample` compared bits, at confidence `1 - alpha`.
pub fn qber_upper_bound(errors: usize, sample: usize, alpha: f64) -> f64 {
    if errors >= sample {
        return 1.0;
    }
    let beta = Beta::new(errors as f64 + 1.0, (sample - errors) as f64).expect("positive shape parameters");
    beta.inverse_cdf(1.0 - alpha)
}

/// Confidence level for the QBER bound behind the weight check.
const WEIGHT_ALPHA: f64 = 1e-6;

/// Raw length before sampling so that `n` bits remain afterwards.
fn raw_length(n: usize, fraction: f64) -> usize {
    let mut len = n + 1;
    while len - (fraction * len as f64).floor() as usize <= n {
        len += 1;
    }
    len
}

struct Context {
    scenario: Scenario,
    code: CodeRef,
    decoder: Box<dyn DecoderEndpoint>,
    pa_servers: Vec<Arc<dyn PaServer>>,
}

pub fn run_scenario(s: &Scenario) -> Result<RunReport, HarnessError> {
    s.validate()?;
    let start = Instant::now();
    let code = s.load_code()?;
    let decoder: Box<dyn DecoderEndpoint> = match s.decoder_endpoint {
        Some(addr) => Box::new(RemoteDecoder::new(addr)),
        None => Box::new(InProcessDecoder::for_code(&code, s.decoder.clone())),
    };
    let pa_servers: Vec<Arc<dyn PaServer>> = match &s.pa {
        PaMode::Local => Vec::new(),
        PaMode::RemPa { n_servers, servers, .. } if servers.is_empty() => {
            (0..*n_servers).map(|_| Arc::new(LocalPaServer) as Arc<dyn PaServer>).collect()
        }
        PaMode::RemPa { servers, .. } => servers
            .iter()
            .map(|a| Arc::new(RemotePaServer::new(*a)) as Arc<dyn PaServer>)
            .collect(),
    };
    let ctx = Context {
        scenario: s.clone(),
        code,
        decoder,
        pa_servers,
    };
    let blocks: Vec<BlockOutcome> = (0..s.blocks as u64)
        .into_par_iter()
        .map(|b| run_block(&ctx, b))
        .collect::<Result<_, _>>()?;
    let count = blocks.len() as f64;
    let sum = |f: fn(&BlockOutcome) -> usize| blocks.iter().map(f).sum::<usize>();
    let balances: Vec<f64> = blocks.iter().filter_map(|b| b.key_balance).collect();
    Ok(RunReport {
        schema: SCHEMA_VERSION,
        name: s.name.clone(),
        seed: s.seed,
        mode: s.mode,
        n: ctx.code.h.n(),
        fer: blocks.iter().filter(|b| b.status != BlockStatus::Ok).count() as f64 / count,
        mean_qber: blocks.iter().map(|b| b.qber_estimate).sum::<f64>() / count,
        public_bits: sum(|b| b.public_bits),
        leaked_bits: sum(|b| b.leaked_bits),
        final_bits: sum(|b| b.final_bits),
        otp_consumed: sum(|b| b.otp_consumed),
        tag_pad_bits: sum(|b| b.tag_pad_bits),
        key_balance: (!balances.is_empty()).then(|| balances.iter().sum()),
        timing: Some(Timing {
            wall_s: start.elapsed().as_secs_f64(),
        }),
        blocks,
    })
}

fn run_block(ctx: &Context, block: u64) -> Result<BlockOutcome, HarnessError> {
    let s = &ctx.scenario;
    let code = &ctx.code;
    let n = code.h.n();
    let p = s.channel_params()?;

    let k_raw = raw_key(raw_length(n, s.sample_fraction), s.seed, block);
    let ch = transmit(&k_raw, &p, block).map_err(|e| HarnessError::Other(e.to_string()))?;
    let mut ledger = LeakageLedger::new();
    let est = estimate_qber(
        &k_raw,
        &ch.k_b,
        s.sample_fraction,
        &mut ledger,
        &mut substream(s.seed, Stream::Sampling, block),
    )
    .map_err(|e| HarnessError::Other(e.to_string()))?;
    let k_a = est.k_a.slice(0, n);
    let k_b = est.k_b.slice(0, n);

    let mut out = BlockOutcome {
        block,
        status: BlockStatus::Ok,
        detail: None,
        qber_estimate: est.qber,
        decoder_iterations: 0,
        public_bits: 0,
        leaked_bits: 0,
        pa_len: 0,
        final_bits: 0,
        otp_consumed: 0,
        tag_pad_bits: 0,
        key_balance: None,
        undetected_error: false,
        final_key: None,
    };
    let mut otp = s
        .key_store
        .map(|k| KeyStore::random(k.bits_per_block, &mut substream(k.seed, Stream::KeyStore, block)))
        .unwrap_or_else(|| KeyStore::new(BitBlock::zeros(0)));
    // pad for the encrypted confirmation tag, kept apart from the IR pad
    let mut tag_pad = KeyStore::random(s.tag_len, &mut substream(s.seed, Stream::KeyStore, block ^ (1 << 63)));
    let opts = IrOptions {
        verify: true,
        weight_bound: s.weight_bound.then(|| {
            let errors = (est.qber * est.sample_size as f64).round() as usize;
            weight_bound(n, qber_upper_bound(errors, est.sample_size, WEIGHT_ALPHA))
        }),
    };
    let dec = ctx.decoder.as_ref();
    let ir = match s.mode {
        OffloadMode::Local => run_local_ir(&k_a, &k_b, code, &s.decoder, block),
        OffloadMode::RemIr => run_rem_ir(&k_a, &k_b, code, &opts, dec, block),
        OffloadMode::RemIrVariant => run_rem_ir_variant(&k_a, &k_b, code, &opts, dec, block),
        OffloadMode::RrEncrypted => {
            run_rr_encrypted(&k_a, &k_b, code, &opts, dec, &mut otp, (s.channel.e, s.channel.d), block).map(|o| {
                out.key_balance = Some(o.key_balance);
                o.ir
            })
        }
    };
    let finish = |mut out: BlockOutcome, ledger: &LeakageLedger, otp: &KeyStore| {
        out.public_bits = ledger.total();
        out.leaked_bits = ledger.total_normalized();
        out.otp_consumed = otp.consumed();
        Ok(out)
    };
    let finish = |mut out: BlockOutcome, ledger: &LeakageLedger, otp: &KeyStore, tag_pad: &KeyStore| {
        out.tag_pad_bits = tag_pad.consumed();
        finish(out, ledger, otp)
    };
    let ir = match ir {
        Ok(ir) => ir,
        Err(abort) => {
            ledger.extend(&abort.transcript.ledger);
            out.status = BlockStatus::IrAbort;
            out.detail = Some(abort.cause.to_string());
            return finish(out, &ledger, &otp, &tag_pad);
        }
    };
    ledger.extend(&ir.transcript.ledger);
    out.decoder_iterations = ir.decoder_iterations;
    // (holder of the reference key, holder of the corrected copy)
    let (ref_key, corrected) = match s.mode {
        OffloadMode::RrEncrypted => (&k_b, &ir.key),
        _ => (&k_a, &ir.key),
    };

    let mut confirm_rng = substream(s.seed, Stream::Confirm, block);
    if s.confirm == ConfirmPlacement::BeforePa {
        let c = confirm(ref_key, corrected, s.tag_len, s.confirm, None, &mut ledger, &mut confirm_rng)
            .map_err(|e| HarnessError::Other(e.to_string()))?;
        if c.verdict == ConfirmVerdict::Reject {
            out.status = BlockStatus::ConfirmReject;
            return finish(out, &ledger, &otp, &tag_pad);
        }
    }

    let m = pa_output_length(n, est.qber, ledger.total_normalized(), s.pa_margin);
    out.pa_len = m;
    if m == 0 {
        out.status = BlockStatus::NoKey;
        return finish(out, &ledger, &otp, &tag_pad);
    }
    let plan = PaPlan::random(n, m, &mut substream(s.seed, Stream::PaSeed, block))
        .map_err(|e| HarnessError::Other(e.to_string()))?;
    ledger.record_neutral("pa_seed", plan.seed.bits().len(), crate::channel::Party::Alice, crate::channel::Party::Bob);
    let amplify = |k: &BitBlock, side: u64| -> Result<BitBlock, String> {
        match &s.pa {
            PaMode::Local => pa_local(k, &plan).map_err(|e| e.to_string()),
            PaMode::RemPa { scheme, spot_check, .. } => {
                let mut rng = substream(s.seed, Stream::Sharing, block * 2 + side);
                run_rem_pa(k, &plan, &ctx.pa_servers, *scheme, *spot_check, &mut rng)
                    .map(|o| o.key)
                    .map_err(|e| e.to_string())
            }
        }
    };
    let (final_ref, final_corr) = match (amplify(ref_key, 0), amplify(corrected, 1)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            out.status = BlockStatus::PaError;
            out.detail = Some(e);
            return finish(out, &ledger, &otp, &tag_pad);
        }
    };

    if s.confirm == ConfirmPlacement::AfterPa {
        match confirm(&final_ref, &final_corr, s.tag_len, s.confirm, Some(&mut tag_pad), &mut ledger, &mut confirm_rng) {
            Ok(c) if c.verdict == ConfirmVerdict::Reject => {
                out.status = BlockStatus::ConfirmReject;
                return finish(out, &ledger, &otp, &tag_pad);
            }
            Ok(_) => {}
            Err(e) => {
                out.status = BlockStatus::PaError;
                out.detail = Some(e.to_string());
                return finish(out, &ledger, &otp, &tag_pad);
            }
        }
    }
    out.undetected_error = final_ref != final_corr;
    out.final_bits = m;
    out.final_key = Some(final_ref);
    finish(out, &ledger, &otp, &tag_pad)
}

#[cfg(test)]
mod tests;
