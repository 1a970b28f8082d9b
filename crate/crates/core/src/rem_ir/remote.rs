use std::net::SocketAddr;
use std::time::Duration;

use super::endpoint::{CodeRef, DecodeReply, DecoderEndpoint, EndpointError};
use crate::bitlinalg::BitBlock;
use crate::wire::{Client, Message, WireError};

/// Client side of the TCP decoder service.
pub struct RemoteDecoder {
    client: Client,
}

impl RemoteDecoder {
    pub fn new(addr: SocketAddr) -> Self {
        RemoteDecoder {
            client: Client::new(addr),
        }
    }

    pub fn with_timeout(self, timeout: Duration) -> Self {
        RemoteDecoder {
            client: self.client.with_timeout(timeout),
        }
    }
}

impl From<WireError> for EndpointError {
    fn from(e: WireError) -> Self {
        match e {
            WireError::Remote { code, message } => EndpointError::Remote { code, message },
            other => EndpointError::Transport(other.to_string()),
        }
    }
}

impl DecoderEndpoint for RemoteDecoder {
    fn decode(&self, code: &CodeRef, s_e: &BitBlock) -> Result<DecodeReply, EndpointError> {
        let reply = self.client.call(&Message::DecodeRequest {
            code_id: code.id,
            syndrome: s_e.clone(),
        })?;
        match reply {
            Message::DecodeResponse {
                converged,
                iterations,
                e_hat,
            } => {
                let e_hat = BitBlock::from_bytes(&e_hat, code.h.n())
                    .map_err(|e| EndpointError::Transport(format!("bad error vector: {e}")))?;
                Ok(DecodeReply {
                    e_hat,
                    converged,
                    iterations,
                })
            }
            other => Err(EndpointError::Transport(format!(
                "expected a decode response, got type 0x{:02x}",
                other.type_byte()
            ))),
        }
    }
}
