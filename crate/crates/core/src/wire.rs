//! Length-prefixed binary framing shared by the decoder and PA services.
//!
//! ```text
//! frame    = len:u32be type:u8 payload      (len counts type + payload)
//! 0x01 DecodeRequest   code_id:u16be bits:u32be syndrome:packed
//! 0x02 DecodeResponse  converged:u8 iterations:u32be e_hat:packed
//! 0x03 Error           code:u8 message:utf8
//! 0x11 PaRequest       scheme:u8 n:u32be m:u32be seed:packed share
//! 0x12 PaResponse      share
//! ```
//! Bit vectors are packed LSB-first. A GF(2) share is `n` packed bits, a
//! prime-field share is `n` big-endian `u64` elements.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::Mutex;
use std::time::Duration;

use crate::bitlinalg::{BitBlock, ToeplitzSeed};
use crate::sharing::{ShareData, P};

pub const DECODE_REQUEST: u8 = 0x01;
pub const DECODE_RESPONSE: u8 = 0x02;
pub const ERROR: u8 = 0x03;
pub const PA_REQUEST: u8 = 0x11;
pub const PA_RESPONSE: u8 = 0x12;

/// Frames larger than this are refused without reading the body.
pub const MAX_FRAME: usize = 64 << 20;

pub mod error_code {
    pub const MALFORMED: u8 = 1;
    pub const UNKNOWN_CODE: u8 = 2;
    pub const DIMENSION: u8 = 3;
    pub const UNSUPPORTED: u8 = 4;
    pub const INTERNAL: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("frame of {0} bytes exceeds the limit")]
    TooLarge(usize),
    #[error("peer reported error {code}: {message}")]
    Remote { code: u8, message: String },
}

fn malformed(msg: impl Into<String>) -> WireError {
    WireError::Malformed(msg.into())
}

/// Field encoding of a PA share payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum PaScheme {
    Gf2 = 0,
    Gfp = 1,
    Shamir = 2,
}

impl PaScheme {
    fn from_u8(b: u8) -> Result<Self, WireError> {
        match b {
            0 => Ok(PaScheme::Gf2),
            1 => Ok(PaScheme::Gfp),
            2 => Ok(PaScheme::Shamir),
            _ => Err(malformed(format!("unknown scheme id {b}"))),
        }
    }

    fn is_binary(self) -> bool {
        self == PaScheme::Gf2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    DecodeRequest {
        code_id: u16,
        syndrome: BitBlock,
    },
    /// `e_hat` stays packed: its bit length is the code length, which only
    /// the requester knows.
    DecodeResponse {
        converged: bool,
        iterations: u32,
        e_hat: Vec<u8>,
    },
    Error {
        code: u8,
        message: String,
    },
    PaRequest {
        scheme: PaScheme,
        seed: ToeplitzSeed,
        share: ShareData,
    },
    /// Raw share payload; its length depends on the request.
    PaResponse {
        payload: Vec<u8>,
    },
}

fn take<'a>(buf: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8], WireError> {
    if buf.len() < n {
        return Err(malformed(format!(
            "{what}: need {n} bytes, {} left",
            buf.len()
        )));
    }
    let (head, rest) = buf.split_at(n);
    *buf = rest;
    Ok(head)
}

fn take_u32(buf: &mut &[u8], what: &str) -> Result<u32, WireError> {
    Ok(u32::from_be_bytes(take(buf, 4, what)?.try_into().unwrap()))
}

fn take_bits(buf: &mut &[u8], len: usize, what: &str) -> Result<BitBlock, WireError> {
    let bytes = take(buf, len.div_ceil(8), what)?;
    BitBlock::from_bytes(bytes, len).map_err(|e| malformed(format!("{what}: {e}")))
}

pub fn encode_share(share: &ShareData) -> Vec<u8> {
    match share {
        ShareData::Bits(b) => b.to_bytes(),
        ShareData::Elems(v) => v.iter().flat_map(|x| x.to_be_bytes()).collect(),
    }
}

pub fn decode_share(bytes: &[u8], len: usize, binary: bool) -> Result<ShareData, WireError> {
    let mut buf = bytes;
    let out = if binary {
        ShareData::Bits(take_bits(&mut buf, len, "share")?)
    } else {
        let raw = take(&mut buf, len * 8, "share")?;
        let elems: Vec<u64> = raw
            .chunks_exact(8)
            .map(|c| u64::from_be_bytes(c.try_into().unwrap()))
            .collect();
        if elems.iter().any(|&x| x >= P) {
            return Err(malformed("share element not reduced mod p"));
        }
        ShareData::Elems(elems)
    };
    if !buf.is_empty() {
        return Err(malformed(format!("{} trailing bytes after share", buf.len())));
    }
    Ok(out)
}

impl Message {
    pub fn type_byte(&self) -> u8 {
        match self {
            Message::DecodeRequest { .. } => DECODE_REQUEST,
            Message::DecodeResponse { .. } => DECODE_RESPONSE,
            Message::Error { .. } => ERROR,
            Message::PaRequest { .. } => PA_REQUEST,
            Message::PaResponse { .. } => PA_RESPONSE,
        }
    }

    pub fn encode_payload(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Message::DecodeRequest { code_id, syndrome } => {
                out.extend_from_slice(&code_id.to_be_bytes());
                out.extend_from_slice(&(syndrome.len() as u32).to_be_bytes());
                out.extend_from_slice(&syndrome.to_bytes());
            }
            Message::DecodeResponse {
                converged,
                iterations,
                e_hat,
            } => {
                out.push(*converged as u8);
                out.extend_from_slice(&iterations.to_be_bytes());
                out.extend_from_slice(e_hat);
            }
            Message::Error { code, message } => {
                out.push(*code);
                out.extend_from_slice(message.as_bytes());
            }
            Message::PaRequest { scheme, seed, share } => {
                out.push(*scheme as u8);
                out.extend_from_slice(&(seed.n() as u32).to_be_bytes());
                out.extend_from_slice(&(seed.m() as u32).to_be_bytes());
                out.extend_from_slice(&seed.bits().to_bytes());
                out.extend_from_slice(&encode_share(share));
            }
            Message::PaResponse { payload } => out.extend_from_slice(payload),
        }
        out
    }

    pub fn decode(type_byte: u8, payload: &[u8]) -> Result<Message, WireError> {
        let mut buf = payload;
        let msg = match type_byte {
            DECODE_REQUEST => {
                let code_id = u16::from_be_bytes(take(&mut buf, 2, "code id")?.try_into().unwrap());
                let len = take_u32(&mut buf, "bit length")? as usize;
                let syndrome = take_bits(&mut buf, len, "syndrome")?;
                Message::DecodeRequest { code_id, syndrome }
            }
            DECODE_RESPONSE => {
                let converged = match take(&mut buf, 1, "converged flag")?[0] {
                    0 => false,
                    1 => true,
                    b => return Err(malformed(format!("converged flag {b}"))),
                };
                let iterations = take_u32(&mut buf, "iterations")?;
                let e_hat = std::mem::take(&mut buf).to_vec();
                Message::DecodeResponse {
                    converged,
                    iterations,
                    e_hat,
                }
            }
            ERROR => {
                let code = take(&mut buf, 1, "error code")?[0];
                let message = String::from_utf8_lossy(std::mem::take(&mut buf)).into_owned();
                Message::Error { code, message }
            }
            PA_REQUEST => {
                let scheme = PaScheme::from_u8(take(&mut buf, 1, "scheme")?[0])?;
                let n = take_u32(&mut buf, "n")? as usize;
                let m = take_u32(&mut buf, "m")? as usize;
                if m == 0 || m > n {
                    return Err(malformed(format!("Toeplitz shape {n}x{m}")));
                }
                let width = if scheme.is_binary() { 1 } else { 64 };
                if (n + m) / 8 + n * width / 8 > MAX_FRAME {
                    return Err(WireError::TooLarge(n));
                }
                let bits = take_bits(&mut buf, n + m - 1, "seed")?;
                let seed = ToeplitzSeed::new(n, m, bits).map_err(|e| malformed(e.to_string()))?;
                let share = decode_share(std::mem::take(&mut buf), n, scheme.is_binary())?;
                Message::PaRequest { scheme, seed, share }
            }
            PA_RESPONSE => Message::PaResponse {
                payload: std::mem::take(&mut buf).to_vec(),
            },
            t => return Err(malformed(format!("unknown message type 0x{t:02x}"))),
        };
        if !buf.is_empty() {
            return Err(malformed(format!("{} trailing bytes", buf.len())));
        }
        Ok(msg)
    }
}

pub fn write_frame<W: Write>(w: &mut W, msg: &Message) -> Result<(), WireError> {
    let payload = msg.encode_payload();
    let len = payload.len() + 1;
    if len > MAX_FRAME {
        return Err(WireError::TooLarge(len));
    }
    let mut frame = Vec::with_capacity(4 + len);
    frame.extend_from_slice(&(len as u32).to_be_bytes());
    frame.push(msg.type_byte());
    frame.extend_from_slice(&payload);
    w.write_all(&frame)?;
    w.flush()?;
    Ok(())
}

/// A frame as read off the stream, before payload parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFrame {
    pub type_byte: u8,
    pub payload: Vec<u8>,
}

/// Reads one frame. `Ok(None)` on clean end of stream before a frame.
pub fn read_raw_frame<R: Read>(r: &mut R) -> Result<Option<RawFrame>, WireError> {
    let mut len_buf = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len_buf[got..])? {
            0 if got == 0 => return Ok(None),
            0 => return Err(malformed("stream ended inside the length prefix")),
            k => got += k,
        }
    }
    let len = u32::from_be_bytes(len_buf) as usize;
    if len == 0 {
        return Err(malformed("zero-length frame has no type byte"));
    }
    if len > MAX_FRAME {
        return Err(WireError::TooLarge(len));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            malformed("stream ended inside a frame")
        } else {
            WireError::Io(e)
        }
    })?;
    let payload = body.split_off(1);
    Ok(Some(RawFrame {
        type_byte: body[0],
        payload,
    }))
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Message>, WireError> {
    match read_raw_frame(r)? {
        None => Ok(None),
        Some(f) => Message::decode(f.type_byte, &f.payload).map(Some),
    }
}

/// Blocking request/response client. Keeps one connection open and
/// reconnects once when a pooled connection turns out to be stale.
pub struct Client {
    addr: SocketAddr,
    timeout: Duration,
    conn: Mutex<Option<TcpStream>>,
}

impl Client {
    pub fn new(addr: SocketAddr) -> Self {
        Client {
            addr,
            timeout: Duration::from_secs(30),
            conn: Mutex::new(None),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    fn connect(&self) -> Result<TcpStream, WireError> {
        let stream = TcpStream::connect_timeout(&self.addr, self.timeout)?;
        stream.set_read_timeout(Some(self.timeout))?;
        stream.set_write_timeout(Some(self.timeout))?;
        stream.set_nodelay(true)?;
        Ok(stream)
    }

    /// Sends `request` and waits for the reply. Error frames become
    /// `WireError::Remote`.
    pub fn call(&self, request: &Message) -> Result<Message, WireError> {
        let mut guard = self.conn.lock().expect("connection lock poisoned");
        for attempt in 0..2 {
            if guard.is_none() {
                *guard = Some(self.connect()?);
            }
            let stream = guard.as_mut().expect("just connected");
            let result = write_frame(stream, request).and_then(|_| read_frame(stream));
            match result {
                Ok(Some(Message::Error { code, message })) => return Err(WireError::Remote { code, message }),
                Ok(Some(reply)) => return Ok(reply),
                Ok(None) | Err(WireError::Io(_)) if attempt == 0 => {
                    *guard = None;
                }
                Ok(None) => {
                    *guard = None;
                    return Err(WireError::Io(io::ErrorKind::UnexpectedEof.into()));
                }
                Err(e) => {
                    *guard = None;
                    return Err(e);
                }
            }
        }
        unreachable!("second attempt always returns")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn round_trip(msg: &Message) -> Message {
        let mut buf = Vec::new();
        write_frame(&mut buf, msg).unwrap();
        read_frame(&mut buf.as_slice()).unwrap().unwrap()
    }

    #[test]
    fn decode_request_layout() {
        let syndrome = BitBlock::from_bools(&[true, false, true, true, false, false, false, false, true]);
        let msg = Message::DecodeRequest { code_id: 7, syndrome };
        let mut buf = Vec::new();
        write_frame(&mut buf, &msg).unwrap();
        assert_eq!(
            buf,
            [0, 0, 0, 9, 0x01, 0, 7, 0, 0, 0, 9, 0b0000_1101, 0b0000_0001]
        );
        assert_eq!(round_trip(&msg), msg);
    }

    #[test]
    fn decode_response_and_error() {
        let msg = Message::DecodeResponse {
            converged: true,
            iterations: 3,
            e_hat: vec![0xAA, 0x01],
        };
        assert_eq!(round_trip(&msg), msg);
        let err = Message::Error {
            code: error_code::UNKNOWN_CODE,
            message: "no code 9".into(),
        };
        assert_eq!(round_trip(&err), err);
    }

    #[test]
    fn pa_request_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let seed = ToeplitzSeed::random(20, 5, &mut rng).unwrap();
        for (scheme, share) in [
            (PaScheme::Gf2, ShareData::Bits(BitBlock::random(20, &mut rng))),
            (PaScheme::Gfp, ShareData::Elems((0..20).map(|i| P - 1 - i).collect())),
        ] {
            let msg = Message::PaRequest {
                scheme,
                seed: seed.clone(),
                share,
            };
            assert_eq!(round_trip(&msg), msg);
        }
    }

    #[test]
    fn malformed_payloads() {
        // syndrome shorter than declared
        assert!(Message::decode(DECODE_REQUEST, &[0, 1, 0, 0, 0, 16, 0xff]).is_err());
        // trailing bytes
        assert!(Message::decode(DECODE_REQUEST, &[0, 1, 0, 0, 0, 8, 0xff, 0]).is_err());
        // dirty padding bits
        assert!(Message::decode(DECODE_REQUEST, &[0, 1, 0, 0, 0, 4, 0xff]).is_err());
        assert!(Message::decode(0x7f, &[]).is_err());
        assert!(Message::decode(DECODE_RESPONSE, &[2, 0, 0, 0, 0]).is_err());
        assert!(Message::decode(PA_REQUEST, &[9, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0]).is_err());
        // m > n
        assert!(Message::decode(PA_REQUEST, &[0, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0]).is_err());
        // unreduced field element
        let mut bad = vec![1, 0, 0, 0, 1, 0, 0, 0, 1, 0];
        bad.extend_from_slice(&u64::MAX.to_be_bytes());
        assert!(Message::decode(PA_REQUEST, &bad).is_err());
    }

    #[test]
    fn stream_truncation() {
        assert!(read_raw_frame(&mut [0u8, 0].as_slice()).is_err());
        assert!(read_raw_frame(&mut [0u8, 0, 0, 5, 1, 0].as_slice()).is_err());
        assert!(read_raw_frame(&mut [0u8, 0, 0, 0].as_slice()).is_err());
        assert!(read_raw_frame(&mut [].as_slice()).unwrap().is_none());
        let huge = ((MAX_FRAME + 1) as u32).to_be_bytes();
        assert!(matches!(read_raw_frame(&mut huge.as_slice()), Err(WireError::TooLarge(_))));
    }

    proptest! {
        #[test]
        fn any_decode_request_round_trips(code_id in any::<u16>(), bits in prop::collection::vec(any::<bool>(), 0..300)) {
            let msg = Message::DecodeRequest { code_id, syndrome: BitBlock::from_bools(&bits) };
            prop_assert_eq!(round_trip(&msg), msg);
        }

        #[test]
        fn garbage_never_panics(t in any::<u8>(), payload in prop::collection::vec(any::<u8>(), 0..64)) {
            let _ = Message::decode(t, &payload);
        }
    }
}
