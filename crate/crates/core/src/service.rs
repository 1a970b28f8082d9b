//! TCP decoder and PA server. One thread per connection; requests on a
//! connection are answered in order.

use std::io::{self, BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use crate::ldpc::DecoderConfig;
use crate::rem_ir::{CodeRegistry, EndpointError, InProcessDecoder, RegistryError};
use crate::sharing::{lin_combine, PublicMatrix, Scheme, ShareVector};
use crate::wire::{self, error_code, encode_share, read_raw_frame, write_frame, Message, PaScheme, WireError};

/// Name of the optional decoder settings file in a codes directory.
pub const DECODER_CONFIG_FILE: &str = "decoder.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Decoder,
    PaServer,
    Both,
}

impl Role {
    fn decodes(self) -> bool {
        matches!(self, Role::Decoder | Role::Both)
    }

    fn amplifies(self) -> bool {
        matches!(self, Role::PaServer | Role::Both)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// Everything a server needs to answer requests.
pub struct Service {
    role: Role,
    decoder: InProcessDecoder,
}

impl Service {
    pub fn new(role: Role, registry: CodeRegistry, cfg: DecoderConfig) -> Self {
        Service {
            role,
            decoder: InProcessDecoder::new(registry, cfg),
        }
    }

    /// Loads the `*.alist` codes in `dir` and, if present, `decoder.json`.
    /// Without it the decoder is sum-product with a 2% prior.
    pub fn from_dir(role: Role, dir: &Path) -> Result<Self, ServiceError> {
        let registry = CodeRegistry::load_dir(dir)?;
        let cfg_path = dir.join(DECODER_CONFIG_FILE);
        let cfg = if cfg_path.exists() {
            let config_err = |message: String| ServiceError::Config {
                path: cfg_path.display().to_string(),
                message,
            };
            let text = std::fs::read_to_string(&cfg_path)?;
            let cfg: DecoderConfig = serde_json::from_str(&text).map_err(|e| config_err(e.to_string()))?;
            cfg.validate().map_err(|e| config_err(e.to_string()))?;
            cfg
        } else {
            DecoderConfig::sum_product(0.02)
        };
        Ok(Self::new(role, registry, cfg))
    }

    pub fn decoder_config(&self) -> &DecoderConfig {
        self.decoder.config()
    }

    /// The reply to one frame. Never fails: problems become Error frames.
    pub fn respond(&self, type_byte: u8, payload: &[u8]) -> Message {
        let error = |code, message: String| Message::Error { code, message };
        let msg = match Message::decode(type_byte, payload) {
            Ok(m) => m,
            Err(e) => {
                let code = if matches!(type_byte, wire::DECODE_REQUEST | wire::PA_REQUEST) {
                    error_code::MALFORMED
                } else {
                    error_code::UNSUPPORTED
                };
                return error(code, e.to_string());
            }
        };
        match msg {
            Message::DecodeRequest { code_id, syndrome } if self.role.decodes() => {
                match self.decoder.decode_by_id(code_id, &syndrome) {
                    Ok(r) => Message::DecodeResponse {
                        converged: r.converged,
                        iterations: r.iterations,
                        e_hat: r.e_hat.to_bytes(),
                    },
                    Err(e @ EndpointError::UnknownCode(_)) => error(error_code::UNKNOWN_CODE, e.to_string()),
                    Err(e @ EndpointError::Dimension { .. }) => error(error_code::DIMENSION, e.to_string()),
                    Err(e) => error(error_code::INTERNAL, e.to_string()),
                }
            }
            Message::PaRequest { scheme, seed, share } if self.role.amplifies() => {
                let share = ShareVector {
                    party_id: 0,
                    n_parties: 2,
                    scheme: match scheme {
                        PaScheme::Gf2 => Scheme::AdditiveGf2,
                        PaScheme::Gfp => Scheme::AdditiveGfp,
                        // the server applies the same map whatever the threshold
                        PaScheme::Shamir => Scheme::Shamir { threshold: 1 },
                    },
                    values: share,
                };
                match lin_combine(&share, &PublicMatrix::Toeplitz(seed)) {
                    Ok(out) => Message::PaResponse {
                        payload: encode_share(&out.values),
                    },
                    Err(e) => error(error_code::DIMENSION, e.to_string()),
                }
            }
            other => error(
                error_code::UNSUPPORTED,
                format!("this server does not handle type 0x{:02x}", other.type_byte()),
            ),
        }
    }

    fn handle(&self, stream: TcpStream) -> Result<(), WireError> {
        let peer = stream.peer_addr().ok();
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut writer = BufWriter::new(stream);
        loop {
            match read_raw_frame(&mut reader) {
                Ok(None) => return Ok(()),
                Ok(Some(frame)) => {
                    let reply = self.respond(frame.type_byte, &frame.payload);
                    if let Message::Error { code, message } = &reply {
                        log::warn!("{peer:?}: error {code}: {message}");
                    }
                    write_frame(&mut writer, &reply)?;
                }
                Err(WireError::Io(e)) => return Err(WireError::Io(e)),
                Err(e) => {
                    // framing is lost; report and drop the connection
                    log::warn!("{peer:?}: {e}");
                    write_frame(
                        &mut writer,
                        &Message::Error {
                            code: error_code::MALFORMED,
                            message: e.to_string(),
                        },
                    )?;
                    return Ok(());
                }
            }
        }
    }
}

/// A running server. Dropping the handle does not stop it; call
/// [`ServerHandle::shutdown`].
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting connections and waits for the accept loop to exit.
    /// Open connections finish on their own threads.
    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // wake the blocking accept
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    /// Blocks until the accept loop exits.
    pub fn join(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Serves on `listener` from a background thread.
pub fn spawn(listener: TcpListener, service: Arc<Service>) -> io::Result<ServerHandle> {
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let flag = stop.clone();
    let thread = std::thread::spawn(move || {
        for conn in listener.incoming() {
            if flag.load(Ordering::SeqCst) {
                break;
            }
            match conn {
                Ok(stream) => {
                    let svc = service.clone();
                    std::thread::spawn(move || {
                        if let Err(e) = svc.handle(stream) {
                            log::debug!("connection closed: {e}");
                        }
                    });
                }
                Err(e) => log::warn!("accept failed: {e}"),
            }
        }
        log::info!("server on {addr} stopped");
    });
    log::info!("serving on {addr}");
    Ok(ServerHandle {
        addr,
        stop,
        thread: Some(thread),
    })
}
