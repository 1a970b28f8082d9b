//! Gallager A/B decoding on an XOR-shared syndrome, simulated among
//! in-process parties with dealer-supplied Beaver triples.

mod circuit;
mod engine;

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::{BitBlock, ParityCheck};
use crate::ldpc::DecoderConfig;
use crate::sharing::{deal_triples, Scheme, ShareData, ShareVector, SharingError, TriplePool};
pub use circuit::{add_many, decode_circuit, geq_many, majority_circuit, min_bitwidth, popcount};
pub use engine::{Engine, MpcEngine, PlainEngine, Router, Shared};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MpcError {
    #[error("bitwidth {bitwidth} cannot hold the counts, need at least {needed}")]
    BitwidthTooSmall { bitwidth: usize, needed: usize },
    #[error("input has {actual} bits, expected {expected}")]
    Dimension { expected: usize, actual: usize },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Sharing(#[from] SharingError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcMetrics {
    pub block_size: usize,
    pub bitwidth: usize,
    /// AND layers per decoder iteration.
    pub circuit_depth: usize,
    pub rounds: usize,
    pub data_bytes: u64,
    pub wall_time: f64,
    pub iterations: u32,
    pub and_gates: usize,
}

pub const METRICS_HEADER: &str = "block_size,bitwidth,circuit_depth,time_s,data_MB,rounds,bitrate_at_10iter";

impl MpcMetrics {
    /// One CSV row. Time, data and rounds are totals for the run; the
    /// bitrate scales the run time to ten iterations.
    pub fn csv_row(&self) -> String {
        let per_iter = self.wall_time / self.iterations.max(1) as f64;
        let bitrate = if per_iter > 0.0 {
            self.block_size as f64 / (10.0 * per_iter)
        } else {
            0.0
        };
        format!(
            "{},{},{},{:.3},{:.3},{},{:.0}",
            self.block_size,
            self.bitwidth,
            self.circuit_depth,
            self.wall_time,
            self.data_bytes as f64 / 1e6,
            self.rounds,
            bitrate
        )
    }
}

#[derive(Debug, Clone)]
pub struct MpcOutcome {
    pub e_hat_shares: Vec<ShareVector>,
    pub metrics: MpcMetrics,
    /// Masked openings received by party 0, if recording was requested.
    pub view: Option<Vec<BitBlock>>,
}

/// AND gates one decode needs, from a plaintext dry run.
pub fn triples_needed(h: &ParityCheck, cfg: &DecoderConfig, bitwidth: usize) -> Result<usize, MpcError> {
    let mut eng = PlainEngine::default();
    decode_circuit(&mut eng, &BitBlock::zeros(h.r()), h, cfg, bitwidth)?;
    Ok(eng.and_gates)
}

/// Runs the fixed-iteration decoder on GF(2) shares of `s_e`, one share
/// per party. The output stays shared.
pub fn mpc_decode(
    s_e_shares: &[ShareVector],
    h: &ParityCheck,
    cfg: &DecoderConfig,
    bitwidth: usize,
    triples: &mut TriplePool,
    record_view: bool,
) -> Result<MpcOutcome, MpcError> {
    cfg.validate().map_err(|e| MpcError::Config(e.to_string()))?;
    let parties = triples.n_parties();
    if s_e_shares.len() != parties {
        return Err(MpcError::Config(format!(
            "{} shares for {parties} parties",
            s_e_shares.len()
        )));
    }
    let mut bits = Vec::with_capacity(parties);
    for (i, sh) in s_e_shares.iter().enumerate() {
        match (&sh.values, sh.scheme, sh.party_id == i) {
            (ShareData::Bits(b), Scheme::AdditiveGf2, true) => bits.push(b.clone()),
            _ => {
                return Err(MpcError::Config(
                    "expected GF(2) additive shares ordered by party id".into(),
                ))
            }
        }
    }
    let start = Instant::now();
    let mut eng = MpcEngine::new(triples, record_view);
    let out = decode_circuit(&mut eng, &Shared(bits), h, cfg, bitwidth)?;
    let wall_time = start.elapsed().as_secs_f64();
    let iterations = cfg.max_iterations;
    let metrics = MpcMetrics {
        block_size: h.n(),
        bitwidth,
        circuit_depth: eng.router.rounds / iterations as usize,
        rounds: eng.router.rounds,
        data_bytes: eng.router.bytes,
        wall_time,
        iterations,
        and_gates: eng.and_gates,
    };
    let e_hat_shares = out
        .0
        .into_iter()
        .enumerate()
        .map(|(i, b)| ShareVector {
            party_id: i,
            n_parties: parties,
            scheme: Scheme::AdditiveGf2,
            values: ShareData::Bits(b),
        })
        .collect();
    Ok(MpcOutcome {
        e_hat_shares,
        metrics,
        view: eng.router.view.take(),
    })
}

/// Random `(3,6)`-regular code of length `n`, an error pattern at rate
/// `qber`, three parties, Gallager B: the setup behind one metrics row.
pub fn mpc_bench<R: Rng + ?Sized>(
    n: usize,
    bitwidth: usize,
    iterations: u32,
    qber: f64,
    rng: &mut R,
) -> Result<MpcMetrics, MpcError> {
    let h = ParityCheck::regular(n, 3, 6, rng).map_err(|e| MpcError::Config(e.to_string()))?;
    let cfg = DecoderConfig::gallager_b(qber).with_iterations(iterations);
    let e = BitBlock::bernoulli(n, qber, rng);
    let s = h.syndrome(&e).expect("length n");
    let shares = crate::sharing::share(&ShareData::Bits(s), Scheme::AdditiveGf2, 3, rng)?;
    let mut pool = deal_triples(triples_needed(&h, &cfg, bitwidth)?, 3, rng)?;
    Ok(mpc_decode(&shares, &h, &cfg, bitwidth, &mut pool, false)?.metrics)
}

#[cfg(test)]
mod tests;
