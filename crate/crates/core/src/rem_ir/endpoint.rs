use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{mpsc, Arc, Mutex};

use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::bitlinalg::{parse_alist, BitBlock, ParityCheck};
use crate::ldpc::{decode_syndrome, DecoderConfig, LdpcError};

/// Reply of an untrusted decoder: a candidate `ê` for the submitted syndrome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeReply {
    pub e_hat: BitBlock,
    pub converged: bool,
    pub iterations: u32,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum EndpointError {
    #[error("decoder has no code with id {0}")]
    UnknownCode(u16),
    #[error("syndrome has {actual} bits, code {code_id} expects {expected}")]
    Dimension {
        code_id: u16,
        expected: usize,
        actual: usize,
    },
    #[error("decoder reported error {code}: {message}")]
    Remote { code: u8, message: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("decoder failed: {0}")]
    Decoder(String),
}

impl From<LdpcError> for EndpointError {
    fn from(e: LdpcError) -> Self {
        EndpointError::Decoder(e.to_string())
    }
}

/// A code both sides agree on: the public id used on the wire and the
/// matrix the requester verifies against.
#[derive(Debug, Clone)]
pub struct CodeRef {
    pub id: u16,
    pub h: Arc<ParityCheck>,
}

impl CodeRef {
    pub fn new(id: u16, h: ParityCheck) -> Self {
        CodeRef { id, h: Arc::new(h) }
    }
}

/// Anything that turns an error syndrome into an error-vector estimate.
pub trait DecoderEndpoint: Send + Sync {
    fn decode(&self, code: &CodeRef, s_e: &BitBlock) -> Result<DecodeReply, EndpointError>;

    /// Two-syndrome form: the endpoint forms `s_e = s_A ⊕ s_B` itself.
    fn decode_pair(&self, code: &CodeRef, s_a: &BitBlock, s_b: &BitBlock) -> Result<DecodeReply, EndpointError> {
        let s_e = s_a.xor(s_b).map_err(|_| EndpointError::Dimension {
            code_id: code.id,
            expected: s_a.len(),
            actual: s_b.len(),
        })?;
        self.decode(code, &s_e)
    }
}

/// Codes known to a decoder, by id.
#[derive(Debug, Clone, Default)]
pub struct CodeRegistry {
    codes: BTreeMap<u16, Arc<ParityCheck>>,
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("code id {0} registered twice")]
    Duplicate(u16),
}

impl CodeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: u16, h: Arc<ParityCheck>) -> Result<(), RegistryError> {
        if self.codes.insert(id, h).is_some() {
            return Err(RegistryError::Duplicate(id));
        }
        Ok(())
    }

    pub fn with(mut self, code: &CodeRef) -> Self {
        self.codes.insert(code.id, code.h.clone());
        self
    }

    pub fn get(&self, id: u16) -> Option<&Arc<ParityCheck>> {
        self.codes.get(&id)
    }

    pub fn ids(&self) -> impl Iterator<Item = u16> + '_ {
        self.codes.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Loads every `*.alist` file whose name starts with a decimal id,
    /// e.g. `7_rate_half.alist` becomes code 7.
    pub fn load_dir(dir: &Path) -> Result<Self, RegistryError> {
        let io_err = |path: &Path, source| RegistryError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut reg = CodeRegistry::new();
        let mut entries: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| io_err(dir, e))?
            .collect::<Result<_, _>>()
            .map_err(|e| io_err(dir, e))?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("alist") {
                continue;
            }
            let name = entry.file_name().to_string_lossy().into_owned();
            let digits: String = name.chars().take_while(char::is_ascii_digit).collect();
            let Ok(id) = digits.parse::<u16>() else {
                log::warn!("skipping {name}: no leading code id");
                continue;
            };
            let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let h = parse_alist(&text).map_err(|e| RegistryError::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            reg.insert(id, Arc::new(h))?;
        }
        Ok(reg)
    }
}

/// Decoder running in the caller's process, with its own code registry.
#[derive(Debug, Clone)]
pub struct InProcessDecoder {
    registry: CodeRegistry,
    cfg: DecoderConfig,
}

impl InProcessDecoder {
    pub fn new(registry: CodeRegistry, cfg: DecoderConfig) -> Self {
        InProcessDecoder { registry, cfg }
    }

    pub fn for_code(code: &CodeRef, cfg: DecoderConfig) -> Self {
        Self::new(CodeRegistry::new().with(code), cfg)
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn decode_by_id(&self, code_id: u16, s_e: &BitBlock) -> Result<DecodeReply, EndpointError> {
        let h = self.registry.get(code_id).ok_or(EndpointError::UnknownCode(code_id))?;
        if s_e.len() != h.r() {
            return Err(EndpointError::Dimension {
                code_id,
                expected: h.r(),
                actual: s_e.len(),
            });
        }
        let r = decode_syndrome(s_e, h, &self.cfg)?;
        Ok(DecodeReply {
            e_hat: r.e_hat,
            converged: r.converged,
            iterations: r.iterations,
        })
    }
}

impl DecoderEndpoint for InProcessDecoder {
    fn decode(&self, code: &CodeRef, s_e: &BitBlock) -> Result<DecodeReply, EndpointError> {
        self.decode_by_id(code.id, s_e)
    }
}

/// How a misbehaving decoder corrupts its answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tamper {
    /// Flip this many distinct random positions of `ê`.
    FlipBits(usize),
    /// Add a random non-zero codeword, keeping the syndrome valid.
    CodewordShift,
}

/// Wraps an honest endpoint and corrupts every reply.
pub struct TamperingDecoder<D> {
    inner: D,
    mode: Tamper,
    rng: Mutex<ChaCha20Rng>,
}

impl<D: DecoderEndpoint> TamperingDecoder<D> {
    pub fn new(inner: D, mode: Tamper, rng: ChaCha20Rng) -> Self {
        TamperingDecoder {
            inner,
            mode,
            rng: Mutex::new(rng),
        }
    }
}

impl<D: DecoderEndpoint> DecoderEndpoint for TamperingDecoder<D> {
    fn decode(&self, code: &CodeRef, s_e: &BitBlock) -> Result<DecodeReply, EndpointError> {
        let mut reply = self.inner.decode(code, s_e)?;
        let mut rng = self.rng.lock().expect("tamper rng poisoned");
        let n = reply.e_hat.len();
        match self.mode {
            Tamper::FlipBits(k) => {
                for i in rand::seq::index::sample(&mut *rng, n, k.min(n)) {
                    reply.e_hat.flip(i);
                }
            }
            Tamper::CodewordShift => {
                let basis = code.h.codeword_basis();
                let mut shift = BitBlock::zeros(n);
                while shift.is_zero() && !basis.is_empty() {
                    for b in &basis {
                        if rng.random_bool(0.5) {
                            shift ^= b;
                        }
                    }
                }
                reply.e_hat ^= &shift;
            }
        }
        Ok(reply)
    }
}

/// Sends each request to every endpoint concurrently and returns the first
/// reply whose `ê` satisfies the syndrome. If none does, the first reply
/// received is returned so the caller's verification can attribute the
/// failure.
pub struct FanOut {
    endpoints: Vec<Arc<dyn DecoderEndpoint>>,
}

impl FanOut {
    pub fn new(endpoints: Vec<Arc<dyn DecoderEndpoint>>) -> Self {
        FanOut { endpoints }
    }
}

impl DecoderEndpoint for FanOut {
    fn decode(&self, code: &CodeRef, s_e: &BitBlock) -> Result<DecodeReply, EndpointError> {
        if self.endpoints.is_empty() {
            return Err(EndpointError::Transport("fan-out has no endpoints".into()));
        }
        let (tx, rx) = mpsc::channel();
        for ep in &self.endpoints {
            let (ep, tx, code, s_e) = (ep.clone(), tx.clone(), code.clone(), s_e.clone());
            // detached: a slow endpoint must not hold up the winner
            std::thread::spawn(move || {
                let _ = tx.send(ep.decode(&code, &s_e));
            });
        }
        drop(tx);
        let mut fallback = None;
        for result in rx.iter() {
            match result {
                Ok(reply) if code.h.syndrome(&reply.e_hat).ok().as_ref() == Some(s_e) => {
                    return Ok(reply);
                }
                other => {
                    fallback.get_or_insert(other);
                }
            }
        }
        fallback.expect("at least one endpoint answered")
    }
}
