//! Syndrome decoders for LDPC codes and the error-vector check run by the
//! party that receives an offloaded decoding result.
//!
//! All decoders solve `e Hᵀ = s` for a low-weight `e`, starting from `e = 0`.

mod bp;
pub(crate) mod flip;

use serde::{Deserialize, Serialize};

use crate::bitlinalg::{BitBlock, ParityCheck};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LdpcError {
    #[error("syndrome has {actual} bits, code has {expected} checks")]
    Dimension { expected: usize, actual: usize },
    #[error("invalid decoder configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    /// A variable contradicts its channel value towards a check only when
    /// every other adjacent check disagrees with it.
    GallagerA,
    /// As `GallagerA` but a threshold of disagreeing checks suffices.
    /// `schedule[t]` is the threshold at iteration `t` (last entry repeats);
    /// an empty schedule means a strict majority of the other checks.
    GallagerB {
        #[serde(default)]
        schedule: Vec<u32>,
    },
    SumProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub max_iterations: u32,
    pub variant: Variant,
    /// Channel crossover estimate; the sum-product prior is `ln((1-q)/q)`.
    pub qber_prior: f64,
}

impl DecoderConfig {
    pub fn gallager_a(qber_prior: f64) -> Self {
        DecoderConfig {
            max_iterations: 10,
            variant: Variant::GallagerA,
            qber_prior,
        }
    }

    pub fn gallager_b(qber_prior: f64) -> Self {
        DecoderConfig {
            max_iterations: 10,
            variant: Variant::GallagerB { schedule: Vec::new() },
            qber_prior,
        }
    }

    pub fn sum_product(qber_prior: f64) -> Self {
        DecoderConfig {
            max_iterations: 60,
            variant: Variant::SumProduct,
            qber_prior,
        }
    }

    pub fn with_iterations(mut self, max_iterations: u32) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn validate(&self) -> Result<(), LdpcError> {
        if self.max_iterations == 0 {
            return Err(LdpcError::Config("max_iterations must be at least 1".into()));
        }
        if let Variant::GallagerB { schedule } = &self.variant {
            if schedule.contains(&0) {
                return Err(LdpcError::Config("threshold schedule entries must be >= 1".into()));
            }
        }
        if !(0.0..=0.5).contains(&self.qber_prior) {
            return Err(LdpcError::Config(format!(
                "qber_prior {} outside [0, 0.5]",
                self.qber_prior
            )));
        }
        Ok(())
    }

    pub fn is_bit_flipping(&self) -> bool {
        !matches!(self.variant, Variant::SumProduct)
    }

    /// Number of agreeing extrinsic check messages (out of `deg - 1`) a
    /// degree-`deg` variable needs before it reports itself flipped in
    /// iteration `iter`. Never below one. Meaningless for sum-product.
    pub fn extrinsic_threshold(&self, deg: usize, iter: u32) -> u32 {
        let others = deg.saturating_sub(1) as u32;
        let t = match &self.variant {
            Variant::GallagerA => others,
            Variant::GallagerB { schedule } if !schedule.is_empty() => {
                schedule[(iter as usize).min(schedule.len() - 1)]
            }
            _ => others / 2 + 1,
        };
        t.max(1)
    }

    /// Check messages (out of `deg`) needed for the final decision `e_v = 1`:
    /// strict majority.
    pub fn decision_threshold(&self, deg: usize) -> u32 {
        deg as u32 / 2 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub e_hat: BitBlock,
    pub converged: bool,
    pub iterations: u32,
    /// `e_hat Hᵀ ⊕ s`; all-zero exactly when `converged`.
    pub residual: BitBlock,
}

impl DecodeResult {
    fn finish(h: &ParityCheck, s: &BitBlock, e_hat: BitBlock, iterations: u32) -> Self {
        let residual = &h.syndrome(&e_hat).expect("decoder keeps length n") ^ s;
        DecodeResult {
            converged: residual.is_zero(),
            e_hat,
            iterations,
            residual,
        }
    }
}

fn check_dims(s: &BitBlock, h: &ParityCheck) -> Result<(), LdpcError> {
    if s.len() != h.r() {
        return Err(LdpcError::Dimension {
            expected: h.r(),
            actual: s.len(),
        });
    }
    Ok(())
}

/// Decodes with early exit once the syndrome is matched.
pub fn decode_syndrome(
    s: &BitBlock,
    h: &ParityCheck,
    cfg: &DecoderConfig,
) -> Result<DecodeResult, LdpcError> {
    check_dims(s, h)?;
    cfg.validate()?;
    Ok(match cfg.variant {
        Variant::SumProduct => bp::decode(s, h, cfg),
        _ => flip::decode(s, h, cfg, true),
    })
}

/// Gallager A/B with exactly `max_iterations` rounds and no convergence
/// test in between, the data-independent schedule used under MPC.
pub fn decode_syndrome_fixed(
    s: &BitBlock,
    h: &ParityCheck,
    cfg: &DecoderConfig,
) -> Result<DecodeResult, LdpcError> {
    check_dims(s, h)?;
    cfg.validate()?;
    if !cfg.is_bit_flipping() {
        return Err(LdpcError::Config(
            "fixed-iteration decoding is defined for bit-flipping variants only".into(),
        ));
    }
    Ok(flip::decode(s, h, cfg, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    SyndromeMismatch,
    WeightExceeded,
}

pub fn verify_error_vector(
    e_hat: &BitBlock,
    s: &BitBlock,
    h: &ParityCheck,
    weight_bound: Option<usize>,
) -> Verdict {
    if e_hat.len() != h.n() || s.len() != h.r() {
        return Verdict::SyndromeMismatch;
    }
    match h.syndrome(e_hat) {
        Ok(got) if &got == s => {}
        _ => return Verdict::SyndromeMismatch,
    }
    match weight_bound {
        Some(b) if e_hat.weight() > b => Verdict::WeightExceeded,
        _ => Verdict::Accept,
    }
}

/// `floor(μ + 5σ)` for `Binomial(n, q)`.
pub fn weight_bound(n: usize, q: f64) -> usize {
    let q = q.clamp(0.0, 1.0);
    let mu = n as f64 * q;
    let sigma = (n as f64 * q * (1.0 - q)).sqrt();
    (mu + 5.0 * sigma).floor() as usize
}
