//! Toeplitz privacy amplification, locally or split across servers that
//! only ever see shares of the key, and the key confirmation tag.

mod confirm;

use std::net::SocketAddr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::{toeplitz_apply_fast, BitBlock, ToeplitzSeed};
use crate::otp::OtpExhausted;
use crate::sharing::{lin_combine, reconstruct, share, PublicMatrix, Scheme, ShareData, ShareVector, SharingError};
use crate::wire::{decode_share, Client, Message, PaScheme, WireError};
pub use confirm::{check_tag, confirm, make_tag, ConfirmOutcome, ConfirmPlacement, ConfirmTag, ConfirmVerdict};

#[derive(Debug, thiserror::Error)]
pub enum PaError {
    #[error("key has {actual} bits, plan expects {expected}")]
    Dimension { expected: usize, actual: usize },
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Sharing(#[from] SharingError),
    #[error("server {index}: {message}")]
    Server { index: usize, message: String },
    #[error("{got} server replies, need {need}")]
    Insufficient { need: usize, got: usize },
    #[error("spot check failed at output bit {bit}")]
    SpotCheck { bit: usize },
    #[error(transparent)]
    Otp(#[from] OtpExhausted),
}

/// Shrinks an `n`-bit reconciled key to `m` bits with a public seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaPlan {
    pub n: usize,
    pub m: usize,
    pub seed: ToeplitzSeed,
}

impl PaPlan {
    pub fn new(seed: ToeplitzSeed) -> Self {
        PaPlan {
            n: seed.n(),
            m: seed.m(),
            seed,
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self, PaError> {
        ToeplitzSeed::random(n, m, rng)
            .map(Self::new)
            .map_err(|e| PaError::Plan(e.to_string()))
    }

    fn check(&self, k: &BitBlock) -> Result<(), PaError> {
        if self.n != self.seed.n() || self.m != self.seed.m() {
            return Err(PaError::Plan(format!(
                "plan says {}x{}, seed is {}x{}",
                self.n,
                self.m,
                self.seed.n(),
                self.seed.m()
            )));
        }
        if k.len() != self.n {
            return Err(PaError::Dimension {
                expected: self.n,
                actual: k.len(),
            });
        }
        Ok(())
    }
}

/// `k = k' T`, computed by each peer on its own copy.
pub fn pa_local(k_prime: &BitBlock, plan: &PaPlan) -> Result<BitBlock, PaError> {
    plan.check(k_prime)?;
    Ok(toeplitz_apply_fast(k_prime, &plan.seed).expect("dimensions checked"))
}

/// A server that applies the public Toeplitz matrix to one share.
pub trait PaServer: Send + Sync {
    fn apply(&self, share: &ShareVector, seed: &ToeplitzSeed) -> Result<ShareVector, PaError>;
}

/// Runs `lin_combine` in the caller's process.
#[derive(Debug, Clone, Copy, Default)]
pub struct LocalPaServer;

impl PaServer for LocalPaServer {
    fn apply(&self, share: &ShareVector, seed: &ToeplitzSeed) -> Result<ShareVector, PaError> {
        Ok(lin_combine(share, &PublicMatrix::Toeplitz(seed.clone()))?)
    }
}

/// Client for a PA server reached over TCP. The share travels in the
/// clear, so the link itself has to be secured by the deployment.
pub struct RemotePaServer {
    client: Client,
}

impl RemotePaServer {
    pub fn new(addr: SocketAddr) -> Self {
        RemotePaServer {
            client: Client::new(addr),
        }
    }
}

pub(crate) fn wire_scheme(s: Scheme) -> PaScheme {
    match s {
        Scheme::AdditiveGf2 => PaScheme::Gf2,
        Scheme::AdditiveGfp => PaScheme::Gfp,
        Scheme::Shamir { .. } => PaScheme::Shamir,
    }
}

impl PaServer for RemotePaServer {
    fn apply(&self, share: &ShareVector, seed: &ToeplitzSeed) -> Result<ShareVector, PaError> {
        let server_err = |e: WireError| PaError::Server {
            index: share.party_id,
            message: e.to_string(),
        };
        let reply = self
            .client
            .call(&Message::PaRequest {
                scheme: wire_scheme(share.scheme),
                seed: seed.clone(),
                share: share.values.clone(),
            })
            .map_err(server_err)?;
        let Message::PaResponse { payload } = reply else {
            return Err(PaError::Server {
                index: share.party_id,
                message: format!("expected a PA response, got type 0x{:02x}", reply.type_byte()),
            });
        };
        let values = decode_share(&payload, seed.m(), share.scheme.is_binary()).map_err(server_err)?;
        Ok(ShareVector {
            values,
            ..share.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemPaOutcome {
    pub key: BitBlock,
    /// Output bits recomputed locally and compared.
    pub spot_checked: usize,
}

/// Shares `k'` among `servers` (one share each), lets every server apply
/// `T` to its share independently and reconstructs `k' T`, reduced mod 2
/// for prime-field schemes. With `spot_check > 0` that fraction of output
/// bits (at least one) is recomputed locally.
pub fn run_rem_pa<R: Rng + ?Sized>(
    k_prime: &BitBlock,
    plan: &PaPlan,
    servers: &[Arc<dyn PaServer>],
    scheme: Scheme,
    spot_check: f64,
    rng: &mut R,
) -> Result<RemPaOutcome, PaError> {
    plan.check(k_prime)?;
    let secret = ShareData::Bits(k_prime.clone());
    let shares = share(&secret, scheme, servers.len(), rng)?;
    let replies: Vec<Result<ShareVector, PaError>> = std::thread::scope(|s| {
        let handles: Vec<_> = servers
            .iter()
            .zip(&shares)
            .map(|(srv, sh)| s.spawn(move || srv.apply(sh, &plan.seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("PA server thread panicked"))
            .collect()
    });
    let need = scheme.quorum(servers.len());
    let mut ok = Vec::with_capacity(replies.len());
    let mut first_err = None;
    for r in replies {
        match r {
            Ok(v) if v.len() == plan.m => ok.push(v),
            Ok(v) => {
                first_err.get_or_insert(PaError::Server {
                    index: v.party_id,
                    message: format!("returned {} values, expected {}", v.len(), plan.m),
                });
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if ok.len() < need {
        return Err(first_err.unwrap_or(PaError::Insufficient { need, got: ok.len() }));
    }
    let key = reconstruct(&ok)?.to_bits();
    let mut spot_checked = 0;
    if spot_check > 0.0 && plan.m > 0 {
        let count = ((plan.m as f64 * spot_check).ceil() as usize).clamp(1, plan.m);
        for j in rand::seq::index::sample(rng, plan.m, count) {
            if plan.seed.column(j).dot(k_prime).expect("column has n bits") != key.get(j) {
                return Err(PaError::SpotCheck { bit: j });
            }
        }
        spot_checked = count;
    }
    Ok(RemPaOutcome { key, spot_checked })
}
