//! Offloaded QKD post-processing: syndrome-based reconciliation handed to
//! untrusted decoders, attack demonstrations for reverse reconciliation,
//! secret-shared bit-flipping decoding and multi-server privacy amplification.

pub mod bitlinalg;
pub mod channel;
pub mod keyrate;
pub mod harness;
pub mod ldpc;
pub mod mpc_flip;
pub mod otp;
pub mod rem_ir;
pub mod rem_pa;
pub mod service;
pub mod sharing;
pub mod stats;
pub mod wire;
